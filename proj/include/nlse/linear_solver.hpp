// Shifted-Laplacian solves and the linear Dirichlet propagator.
//
// Three backends behind one interface:
//  * dimension 1: Thomas tridiagonal solves (any interval domain);
//  * box-like interiors in any dimension: tensor sine-basis (DST-I)
//    diagonalization of the stencil, giving exact solves and the exact
//    discrete propagator;
//  * staircase masks in dimension 2/3: sparse LU factorization.
#pragma once

#include <memory>

#include "nlse/field.hpp"

namespace nlse {

class DirichletSolver {
 public:
  explicit DirichletSolver(GridPtr g);
  ~DirichletSolver();
  DirichletSolver(const DirichletSolver&) = delete;
  DirichletSolver& operator=(const DirichletSolver&) = delete;

  /// (I + c (-laplacian))^{-1} b for real c >= 0.
  RealField solve_shifted(double c, const RealField& b);
  /// Same with a complex shift (used by the midpoint time step, c = i gamma).
  ComplexField solve_shifted(cplx c, const ComplexField& b);

  /// Whether the exact sine-basis propagator is available (box-like interior).
  bool has_eigenbasis() const;

  /// Multiply each stencil eigencomponent by exp(-i t lambda_k); this is the
  /// exact flow of  d psi/dt = -i t_scale (-laplacian) psi  over unit time.
  /// Throws when no eigenbasis is available.
  ComplexField propagate(double t, const ComplexField& psi);

  /// Stencil eigenvalues of (-laplacian) along one axis (box-like only).
  const std::vector<double>& axis_eigenvalues(int axis) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nlse
