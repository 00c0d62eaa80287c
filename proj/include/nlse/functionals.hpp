// Conserved quantities, action functionals and trajectory diagnostics.
#pragma once

#include <string>

#include "nlse/calculus.hpp"
#include "nlse/model.hpp"

namespace nlse {

/// Charge: integral of |psi|^2.
double charge(const RealField& u);
double charge(const ComplexField& psi);

/// Scaled charge C_h = h^{-N beta} * charge.
double charge_h(const RealField& u, double h, double alpha);
double charge_h(const ComplexField& psi, double h, double alpha);

/// Action with general coefficients: integral of kappa/2 |grad u|^2 +
/// w_scale W(u), with the edge-difference Dirichlet form.  action_J is the
/// unscaled case (kappa = w_scale = 1); action_J_h applies the model's h and
/// alpha: h^{-N beta} integral of (h^2/2 |grad u|^2 + h^{-alpha} W(u)).
double action_scaled(const RealField& u, const ModelSpec& m, double kappa, double w_scale);
double action_J(const RealField& u, const ModelSpec& m);
double action_J_h(const RealField& u, const ModelSpec& m);

/// Conserved energy of the evolution: integral of h^2/2 |grad psi|^2 +
/// h^{-alpha} W(|psi|) + V |psi|^2.
double total_energy(const ComplexField& psi, const ModelSpec& m);

/// Barycenter: integral of x |psi|^2 divided by the charge.
Vec3 barycenter(const ComplexField& psi);

/// Momentum: Im integral of conj(psi) grad psi (central differences).
Vec3 momentum(const ComplexField& psi);

/// Scaled outside mass: h^{-N beta} * integral over the interior nodes at
/// distance >= radius from the center of |psi|^2.
double mass_outside_ball(const ComplexField& psi, const Vec3& center, double radius, double h,
                         double alpha);
/// Fraction form: outside mass over total (h-independent).
double mass_outside_fraction(const ComplexField& psi, const Vec3& center, double radius);

/// Gradient ratio of the modulus outside a ball: integral outside of
/// |grad u|^2 over the total, with the central-difference gradient.
double grad_ratio_outside_ball(const RealField& u, const Vec3& center, double radius);

/// Boundary force: 1/2 sum over exposed faces of |du/dn|^2 n dsigma with the
/// inward normal n.
Vec3 boundary_force(const RealField& u);

/// Potential force: - integral of u^2 grad V.
Vec3 potential_force(const RealField& u, const ModelSpec& m);

/// One diagnostics row of a trajectory.
struct DiagnosticsSample {
  double t = 0.0;
  double charge = 0.0;     // C_h for the run's h/alpha
  double energy = 0.0;
  double J_value = 0.0;    // action_J_h of the modulus
  Vec3 q{0, 0, 0};
  Vec3 p{0, 0, 0};
  double mass_out = 0.0;   // fraction outside the diagnostic ball (0 if unset)
  double grad_out = 0.0;   // gradient ratio outside the diagnostic ball
  Vec3 Fb{0, 0, 0};
  Vec3 Fv{0, 0, 0};
};

std::string diagnostics_csv_header(int dim);
std::string diagnostics_csv_row(const DiagnosticsSample& s, int dim);

}  // namespace nlse
