#include "nlse/field.hpp"

#include <stdexcept>

namespace nlse {

namespace detail {
void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (a.get() != b.get())
    throw std::invalid_argument("field arithmetic requires the identical grid object");
}
}  // namespace detail

RealField real_field_from(const GridPtr& g, const std::function<double(const Vec3&)>& f) {
  RealField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(g->coord(static_cast<int32_t>(i)));
  return u;
}

ComplexField complex_field_from(const GridPtr& g, const std::function<cplx(const Vec3&)>& f) {
  ComplexField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(g->coord(static_cast<int32_t>(i)));
  return u;
}

ComplexField to_complex(const RealField& u) {
  ComplexField out(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = cplx(u[i], 0.0);
  return out;
}

RealField modulus(const ComplexField& psi) {
  RealField out(psi.grid);
  for (std::size_t i = 0; i < psi.size(); ++i) out[i] = std::abs(psi[i]);
  return out;
}

}  // namespace nlse
