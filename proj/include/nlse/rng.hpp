// Deterministic randomness: seeded engine plus smooth random grid fields.
#pragma once

#include <cstdint>
#include <random>

#include "nlse/field.hpp"

namespace nlse {

/// splitmix64 step; used to derive independent stream seeds from a base seed.
uint64_t mix_seed(uint64_t base, uint64_t stream);

/// Seeded generator with hand-rolled distributions so that sequences depend
/// only on the mt19937_64 stream (not on library-specific distribution code).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard normal via Box-Muller

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Smooth positive bump with a random center (inner 60% of the bounding box)
/// and width; vanishes rapidly toward the boundary.  Used for flow restarts.
/// A positive max_width caps the bump width below the box half-width, so
/// starts can be matched to an intrinsic length of the energy rather than to
/// the domain size.
RealField random_bump(const GridPtr& g, Rng& rng, double max_width = 0.0);

/// Smooth zero-boundary field built from a few low sine modes with random
/// amplitudes (decay 1/k^2), rescaled to a target H1 norm.
RealField random_h1_field(const GridPtr& g, Rng& rng, double target_h1, int n_modes = 6);

}  // namespace nlse
