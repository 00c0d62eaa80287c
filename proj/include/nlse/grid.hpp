// Uniform Cartesian grids with implicit zero extension outside the domain.
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "nlse/domain.hpp"

namespace nlse {

/// One exposed face of the staircase boundary between an interior node's cell
/// and the exterior.  `axis`/`side` locate the exterior neighbor (side = +1
/// means the neighbor at +axis is exterior); the inward unit normal is
/// -side * e_axis.  `area` is the face surface element (product of the
/// transverse spacings; 1 in dimension 1).
struct BoundaryFace {
  int32_t node = -1;    // adjacent interior node id
  int32_t node2 = -1;   // next interior node inward along the axis, -1 if none
  int16_t axis = 0;
  int16_t side = +1;
  double area = 1.0;
};

/// Tensor lattice over the domain's bounding box with `n_axis` nodes per axis
/// (boundary-closure nodes included).  Fields store values at interior nodes
/// only; every stencil treats nodes outside the interior as exact zeros, which
/// realizes the homogeneous Dirichlet condition.
class Grid {
 public:
  DomainSpec domain;
  int n_axis = 0;          // lattice nodes per axis, >= 3
  int dim = 1;
  Vec3 dx{0, 0, 0};        // spacing per axis
  Vec3 origin{0, 0, 0};    // coordinate of lattice index 0 per axis
  double cell_volume = 0;  // product of spacings

  std::vector<int32_t> interior_id;        // lattice flat index -> interior id or -1
  std::vector<int32_t> interior_flat;      // interior id -> lattice flat index
  std::vector<std::array<int32_t, 6>> nbr; // interior id -> neighbor ids (axis*2+dir), -1 = zero ghost
  std::vector<BoundaryFace> faces;

  // True when the interior occupies a full rectangular index block; the
  // Dirichlet stencil then diagonalizes in the tensor sine basis.
  bool box_like = false;
  std::array<int, 3> block_lo{0, 0, 0};  // inclusive index block when box_like
  std::array<int, 3> block_hi{0, 0, 0};

  std::size_t n_interior() const { return interior_flat.size(); }

  /// Coordinates of an interior node.
  Vec3 coord(int32_t id) const;

  /// Lattice index along each axis of an interior node.
  std::array<int, 3> lattice(int32_t id) const;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Build the grid for a domain.  Requires nodes_per_axis >= 3 and a nonempty
/// interior.  For a box the interior is the full inner index block; for a ball
/// it is the set of lattice nodes strictly inside the sphere (staircase mask;
/// nodes exactly on the sphere are exterior).
GridPtr build_grid(const DomainSpec& domain, int nodes_per_axis);

}  // namespace nlse
