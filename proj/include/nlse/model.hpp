// Nonlinearity W, potential V, and structural-condition validation.
#pragma once

#include <string>
#include <vector>

#include "nlse/domain.hpp"

namespace nlse {

/// Quotient cutoff: W'(s)/s is evaluated as 0 for s below this threshold.
inline constexpr double eps_quot = 1e-12;

enum class WFamily {
  sin_power,  // W(s) = w_amp * sin(|s|^p); even, bounded, sign-changing
  zero,       // W == 0 (linear validation-only model)
  table,      // cubic interpolation of a two-column (s, W) file, even-extended
};

enum class VFamily {
  zero,
  quadratic_well,  // V(x) = v2 * |x - v_center|^2, v2 >= 0
  table,           // radial cubic interpolation of a two-column (r, V) file
};

/// Cubic-spline table (natural boundary conditions) on increasing knots.
struct SplineTable {
  std::vector<double> x, y, y2;  // knots, values, second derivatives
  double eval(double s) const;
  double deriv(double s) const;
  double deriv2(double s) const;
};

struct ModelSpec {
  WFamily w_family = WFamily::sin_power;
  double p = 3.0;      // growth exponent of the derivative bounds
  double w_amp = 1.0;  // amplitude of the sin_power family
  std::string w_table_path;
  SplineTable w_table;

  VFamily v_family = VFamily::zero;
  double v2 = 0.0;
  Vec3 v_center{0, 0, 0};
  std::string v_table_path;
  SplineTable v_table;

  double alpha = 1.0;  // coupling exponent (>= 0)
  double h = 1.0;      // semiclassical parameter (> 0)
  double sigma = 1.0;  // L2 constraint value (> 0)
  double s0 = 0.0;     // negativity witness; 0 = auto ((3 pi / 2)^{1/p} for sin_power)

  /// Fill derived defaults (s0), load tables, check basic parameter sanity.
  void finalize();
};

double eval_W(const ModelSpec& m, double s);
double eval_Wprime(const ModelSpec& m, double s);
double eval_Wsecond(const ModelSpec& m, double s);
/// F(s) = W'(s)/s with the eps_quot cutoff; realizes W'(|psi|) psi / |psi|.
double nonlinear_quotient(const ModelSpec& m, double s);

double eval_V(const ModelSpec& m, const Vec3& x, int dim);
Vec3 grad_V(const ModelSpec& m, const Vec3& x, int dim);

/// One validated structural condition.
struct ConditionCheck {
  std::string name;
  bool required_for_core = true;  // else required for the localization studies only
  bool pass = false;
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionCheck> checks;
  bool core_ok = false;          // evenness/bounds/continuity-type conditions
  bool localization_ok = false;  // additionally: negativity witness and p-window
  std::string summary() const;
};

/// Sample-based validation of the structural conditions in dimension `dim`:
/// evenness and boundedness of W, the |s|^{p-1} and |s|^{p-2} envelopes of
/// W' and W'', the negativity witness W(s0) < 0, nonnegativity of V, and the
/// p-windows 2 < p < 2* (core) and 2 < p < 2 + 4/dim (localization).
ConditionReport validate_conditions(const ModelSpec& m, int dim);

}  // namespace nlse
