// Quadrature and finite-difference calculus on Dirichlet grids.
//
// Two gradient notions coexist deliberately:
//  * gradient(): second-order central differences, used for pointwise
//    diagnostics (momentum density, phase kinetic density, outside ratios);
//  * dirichlet_grad_inner(): the staggered edge-difference inner product,
//    which satisfies integrate((-laplacian f) * g) = dirichlet_grad_inner(f, g)
//    as an algebraic identity and therefore backs every energy functional.
#pragma once

#include <array>

#include "nlse/field.hpp"

namespace nlse {

/// Midpoint/Riemann quadrature: cell volume times the sum over interior nodes.
double integrate(const RealField& f);
cplx integrate(const ComplexField& f);

/// L2 inner products (the complex one is conjugate-linear in the first slot).
double l2_inner(const RealField& f, const RealField& g);
cplx l2_inner(const ComplexField& f, const ComplexField& g);
double l2_norm2(const RealField& f);
double l2_norm2(const ComplexField& f);

/// Central-difference gradient per axis with zero ghosts outside the domain.
std::array<RealField, 3> gradient(const RealField& f);
std::array<ComplexField, 3> gradient(const ComplexField& f);

/// 2N+1-point second-difference Laplacian with zero ghosts.
RealField laplacian(const RealField& f);
ComplexField laplacian(const ComplexField& f);

/// Edge-difference Dirichlet form: sum over all lattice edges with at least
/// one interior endpoint of (D+ f)(D+ g) times the cell volume.  Exact
/// summation-by-parts partner of laplacian().
double dirichlet_grad_inner(const RealField& f, const RealField& g);
/// Complex version: sum of conj(D+ f) (D+ g); its real part is the Dirichlet
/// energy of the complex field.
cplx dirichlet_grad_inner(const ComplexField& f, const ComplexField& g);
double dirichlet_energy(const RealField& f);   // = dirichlet_grad_inner(f, f)
double dirichlet_energy(const ComplexField& f);

/// Full H1 norm: sqrt(dirichlet_energy + integral of |f|^2).
double h1_norm(const RealField& f);
double h1_norm(const ComplexField& f);

/// Squared one-sided normal-derivative estimate at one exposed boundary face
/// (second-order three-point formula; falls back to first order when only one
/// interior node is available along the face axis).
struct FluxSample {
  const BoundaryFace* face = nullptr;
  double gn2 = 0.0;  // |d f / d n|^2 at the face
};
std::vector<FluxSample> boundary_flux_samples(const RealField& f);

}  // namespace nlse
