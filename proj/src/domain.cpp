#include "nlse/domain.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nlse {

static void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("domain dimension must be 1, 2 or 3");
}

DomainSpec DomainSpec::box_domain(int dim, const Vec3& center, const Vec3& half_widths) {
  check_dim(dim);
  DomainSpec d;
  d.kind = DomainKind::box;
  d.dim = dim;
  d.center = center;
  d.half_widths = half_widths;
  for (int a = 0; a < dim; ++a)
    if (!(half_widths[a] > 0.0)) throw std::invalid_argument("box half widths must be positive");
  return d;
}

DomainSpec DomainSpec::ball_domain(int dim, const Vec3& center, double radius) {
  check_dim(dim);
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  DomainSpec d;
  d.kind = DomainKind::ball;
  d.dim = dim;
  d.center = center;
  d.radius = radius;
  return d;
}

bool DomainSpec::contains(const Vec3& x) const {
  if (kind == DomainKind::box) {
    for (int a = 0; a < dim; ++a)
      if (std::abs(x[a] - center[a]) >= half_widths[a]) return false;
    return true;
  }
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double d = x[a] - center[a];
    r2 += d * d;
  }
  return r2 < radius * radius;
}

void DomainSpec::bounding_box(Vec3& lo, Vec3& hi) const {
  for (int a = 0; a < dim; ++a) {
    const double hw = (kind == DomainKind::box) ? half_widths[a] : radius;
    lo[a] = center[a] - hw;
    hi[a] = center[a] + hw;
  }
}

double DomainSpec::diameter() const {
  if (kind == DomainKind::ball) return 2.0 * radius;
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += 4.0 * half_widths[a] * half_widths[a];
  return std::sqrt(s);
}

double DomainSpec::distance_to_boundary(const Vec3& x) const {
  if (kind == DomainKind::ball) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double d = x[a] - center[a];
      r2 += d * d;
    }
    return radius - std::sqrt(r2);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim; ++a) best = std::min(best, half_widths[a] - std::abs(x[a] - center[a]));
  return best;
}

std::string DomainSpec::describe() const {
  std::ostringstream os;
  os << (kind == DomainKind::box ? "box" : "ball") << " dim=" << dim << " center=(";
  for (int a = 0; a < dim; ++a) os << (a ? "," : "") << center[a];
  os << ")";
  if (kind == DomainKind::box) {
    os << " half_widths=(";
    for (int a = 0; a < dim; ++a) os << (a ? "," : "") << half_widths[a];
    os << ")";
  } else {
    os << " radius=" << radius;
  }
  return os.str();
}

DomainSpec inflate_domain(const DomainSpec& d, double h, double alpha) {
  if (!(h > 0.0)) throw std::invalid_argument("inflate_domain: h must be positive");
  const double s = std::pow(h, -beta_of(alpha));  // h^{-beta}
  DomainSpec out = d;
  for (int a = 0; a < d.dim; ++a) {
    out.center[a] = d.center[a] * s;
    out.half_widths[a] = d.half_widths[a] * s;
  }
  out.radius = d.radius * s;
  return out;
}

}  // namespace nlse
