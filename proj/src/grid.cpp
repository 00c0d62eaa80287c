#include "nlse/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace nlse {

Vec3 Grid::coord(int32_t id) const {
  const auto ijk = lattice(id);
  Vec3 x{0, 0, 0};
  for (int a = 0; a < dim; ++a) x[a] = origin[a] + ijk[a] * dx[a];
  return x;
}

std::array<int, 3> Grid::lattice(int32_t id) const {
  int flat = interior_flat[id];
  std::array<int, 3> ijk{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    ijk[a] = flat % n_axis;
    flat /= n_axis;
  }
  return ijk;
}

GridPtr build_grid(const DomainSpec& domain, int nodes_per_axis) {
  if (nodes_per_axis < 3) throw std::invalid_argument("build_grid: nodes_per_axis must be >= 3");
  auto g = std::make_shared<Grid>();
  g->domain = domain;
  g->n_axis = nodes_per_axis;
  g->dim = domain.dim;

  Vec3 lo, hi;
  domain.bounding_box(lo, hi);
  g->cell_volume = 1.0;
  for (int a = 0; a < g->dim; ++a) {
    g->origin[a] = lo[a];
    g->dx[a] = (hi[a] - lo[a]) / (nodes_per_axis - 1);
    g->cell_volume *= g->dx[a];
  }

  std::size_t n_lattice = 1;
  for (int a = 0; a < g->dim; ++a) n_lattice *= nodes_per_axis;
  g->interior_id.assign(n_lattice, -1);

  // Classify lattice nodes; flat index runs with the last axis fastest.
  std::array<int, 3> ijk{0, 0, 0};
  for (std::size_t flat = 0; flat < n_lattice; ++flat) {
    std::size_t rest = flat;
    for (int a = g->dim - 1; a >= 0; --a) {
      ijk[a] = static_cast<int>(rest % nodes_per_axis);
      rest /= nodes_per_axis;
    }
    Vec3 x{0, 0, 0};
    for (int a = 0; a < g->dim; ++a) x[a] = g->origin[a] + ijk[a] * g->dx[a];
    if (domain.contains(x)) {
      g->interior_id[flat] = static_cast<int32_t>(g->interior_flat.size());
      g->interior_flat.push_back(static_cast<int32_t>(flat));
    }
  }
  if (g->interior_flat.empty()) throw std::invalid_argument("build_grid: empty interior");

  // Neighbor table and exposed boundary faces.
  std::array<std::size_t, 3> stride{1, 1, 1};
  for (int a = g->dim - 2; a >= 0; --a) stride[a] = stride[a + 1] * nodes_per_axis;
  g->nbr.resize(g->n_interior());
  for (std::size_t id = 0; id < g->n_interior(); ++id) {
    const int flat = g->interior_flat[id];
    std::size_t rest = flat;
    for (int a = g->dim - 1; a >= 0; --a) {
      ijk[a] = static_cast<int>(rest % nodes_per_axis);
      rest /= nodes_per_axis;
    }
    for (int a = 0; a < g->dim; ++a) {
      for (int dir = 0; dir < 2; ++dir) {
        const int step = dir ? +1 : -1;
        const int j = ijk[a] + step;
        int32_t nid = -1;
        if (j >= 0 && j < nodes_per_axis)
          nid = g->interior_id[flat + step * static_cast<long>(stride[a])];
        g->nbr[id][2 * a + dir] = nid;
        if (nid < 0) {
          BoundaryFace f;
          f.node = static_cast<int32_t>(id);
          f.axis = static_cast<int16_t>(a);
          f.side = static_cast<int16_t>(step);
          f.node2 = g->nbr[id][2 * a + (1 - dir)];  // may still be unset; fixed below
          f.area = g->cell_volume / g->dx[a];
          g->faces.push_back(f);
        }
      }
    }
  }
  // Second pass for face.node2: the neighbor one step inward (opposite side).
  for (auto& f : g->faces) {
    f.node2 = g->nbr[f.node][2 * f.axis + (f.side > 0 ? 0 : 1)];
  }

  // Detect a full rectangular interior block (always true for boxes).
  std::array<int, 3> blo{nodes_per_axis, nodes_per_axis, nodes_per_axis}, bhi{-1, -1, -1};
  for (std::size_t id = 0; id < g->n_interior(); ++id) {
    const auto c = g->lattice(static_cast<int32_t>(id));
    for (int a = 0; a < g->dim; ++a) {
      blo[a] = std::min(blo[a], c[a]);
      bhi[a] = std::max(bhi[a], c[a]);
    }
  }
  std::size_t block = 1;
  for (int a = 0; a < g->dim; ++a) block *= static_cast<std::size_t>(bhi[a] - blo[a] + 1);
  g->box_like = (block == g->n_interior());
  g->block_lo = blo;
  g->block_hi = bhi;
  return g;
}

}  // namespace nlse
