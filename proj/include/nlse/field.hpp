// Real- and complex-valued grid functions (values at interior nodes).
#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "nlse/grid.hpp"

namespace nlse {

using cplx = std::complex<double>;

namespace detail {
void require_same_grid(const GridPtr& a, const GridPtr& b);
}

/// A scalar field sampled at the interior nodes of one grid.  Values on and
/// outside the boundary are implicitly zero.  Arithmetic combines fields only
/// when they share the same grid object.
template <typename T>
struct FieldT {
  GridPtr grid;
  std::vector<T> v;

  FieldT() = default;
  explicit FieldT(GridPtr g, T fill = T{}) : grid(std::move(g)), v(grid->n_interior(), fill) {}

  std::size_t size() const { return v.size(); }
  T& operator[](std::size_t i) { return v[i]; }
  const T& operator[](std::size_t i) const { return v[i]; }

  FieldT& operator+=(const FieldT& o) {
    detail::require_same_grid(grid, o.grid);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
  }
  FieldT& operator-=(const FieldT& o) {
    detail::require_same_grid(grid, o.grid);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
    return *this;
  }
  FieldT& operator*=(T s) {
    for (auto& x : v) x *= s;
    return *this;
  }
  friend FieldT operator+(FieldT a, const FieldT& b) { return a += b; }
  friend FieldT operator-(FieldT a, const FieldT& b) { return a -= b; }
  friend FieldT operator*(T s, FieldT a) { return a *= s; }
};

using RealField = FieldT<double>;
using ComplexField = FieldT<cplx>;

RealField real_field_from(const GridPtr& g, const std::function<double(const Vec3&)>& f);
ComplexField complex_field_from(const GridPtr& g, const std::function<cplx(const Vec3&)>& f);

/// Promote a real field to a complex one (imaginary part zero).
ComplexField to_complex(const RealField& u);

/// Pointwise modulus |psi|.
RealField modulus(const ComplexField& psi);

}  // namespace nlse
