// Bounded computational domains (boxes and balls) in dimension 1..3.
#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace nlse {

using Vec3 = std::array<double, 3>;  // first `dim` entries are meaningful

enum class DomainKind { box, ball };

/// An open bounded domain with zero boundary data implied everywhere outside it.
/// Boxes are axis-aligned products of intervals (center +/- half_widths);
/// balls are Euclidean balls (in dim 1 a ball is an interval).
struct DomainSpec {
  DomainKind kind = DomainKind::box;
  int dim = 1;
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 half_widths{1.0, 1.0, 1.0};  // box only
  double radius = 1.0;              // ball only

  static DomainSpec box_domain(int dim, const Vec3& center, const Vec3& half_widths);
  static DomainSpec ball_domain(int dim, const Vec3& center, double radius);

  /// Strict interior membership test.
  bool contains(const Vec3& x) const;

  /// Bounding box [lo, hi] per axis (the closure of the domain fits inside).
  void bounding_box(Vec3& lo, Vec3& hi) const;

  /// Euclidean diameter of the domain.
  double diameter() const;

  /// Distance from an interior point to the boundary (nonpositive outside).
  double distance_to_boundary(const Vec3& x) const;

  std::string describe() const;
};

/// Inflated domain: the input scaled by h^{-beta} about the origin, where
/// beta = 1 + alpha/2.  Shape kind is preserved (boxes stay boxes, balls stay
/// balls); a ball not centered at the origin has its center moved to
/// center/h^beta.  Requires h > 0.
DomainSpec inflate_domain(const DomainSpec& d, double h, double alpha);

/// beta exponent of the inflation map.
inline double beta_of(double alpha) { return 1.0 + 0.5 * alpha; }

}  // namespace nlse
