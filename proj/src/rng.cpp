#include "nlse/rng.hpp"

#include <cmath>

#include "nlse/calculus.hpp"

namespace nlse {

uint64_t mix_seed(uint64_t base, uint64_t stream) {
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  // 53 random bits into [0, 1).
  return (eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform(), u2 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

RealField random_bump(const GridPtr& g, Rng& rng, double max_width) {
  Vec3 lo, hi;
  g->domain.bounding_box(lo, hi);
  Vec3 c{0, 0, 0};
  double min_hw = 1e300;
  for (int a = 0; a < g->dim; ++a) {
    const double mid = 0.5 * (lo[a] + hi[a]);
    const double hw = 0.5 * (hi[a] - lo[a]);
    c[a] = mid + 0.6 * hw * (2.0 * rng.uniform() - 1.0);
    min_hw = std::min(min_hw, hw);
  }
  if (max_width > 0.0) min_hw = std::min(min_hw, max_width);
  const double width = min_hw * rng.uniform(0.15, 0.5);
  RealField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec3 x = g->coord(static_cast<int32_t>(i));
    double r2 = 0.0;
    for (int a = 0; a < g->dim; ++a) {
      const double d = x[a] - c[a];
      r2 += d * d;
    }
    u[i] = std::exp(-r2 / (2.0 * width * width));
  }
  return u;
}

RealField random_h1_field(const GridPtr& g, Rng& rng, double target_h1, int n_modes) {
  Vec3 lo, hi;
  g->domain.bounding_box(lo, hi);
  RealField w(g);
  // Tensor sine modes of the bounding box vanish on its faces; for staircase
  // domains the profile is small near the boundary, which is all we need from
  // a perturbation generator.
  std::vector<std::array<double, 4>> modes;  // amplitude, k per axis
  for (int m = 0; m < n_modes; ++m) {
    std::array<double, 4> mk{};
    double k2 = 0.0;
    for (int a = 0; a < g->dim; ++a) {
      mk[1 + a] = 1.0 + static_cast<double>(m % 3 + (a == 0 ? m / 3 : 0));
      k2 += mk[1 + a] * mk[1 + a];
    }
    mk[0] = rng.normal() / k2;
    modes.push_back(mk);
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec3 x = g->coord(static_cast<int32_t>(i));
    double s = 0.0;
    for (const auto& mk : modes) {
      double prod = mk[0];
      for (int a = 0; a < g->dim; ++a) {
        const double t = (x[a] - lo[a]) / (hi[a] - lo[a]);
        prod *= std::sin(M_PI * mk[1 + a] * t);
      }
      s += prod;
    }
    w[i] = s;
  }
  const double nrm = h1_norm(w);
  if (nrm > 0.0) w *= target_h1 / nrm;
  return w;
}

}  // namespace nlse
