// Time integration of  i h dpsi/dt = -(h^2/2) lap psi
//                                    + (1/(2 h^alpha)) W'(|psi|) psi/|psi| + V psi.
//
// crank_nicolson: implicit midpoint rule.  The Laplacian part of the midpoint
// system is solved exactly each inner iteration; the bounded quotient and
// potential terms are handled by fixed-point iteration to fp_tol.  Conserves
// charge to the inner tolerance and energy to O(dt^2).
//
// strang_splitting: exact pointwise phase rotation for the quotient/potential
// half-steps around the exact sine-basis linear propagator (box-like grids
// only).  Unitary, so charge-exact; useful when the quotient coefficient is
// stiff and the midpoint fixed-point would need a tiny dt.
#pragma once

#include <functional>
#include <string>

#include "nlse/functionals.hpp"

namespace nlse {

enum class Scheme { crank_nicolson, strang_splitting };

struct EvolveOpts {
  Scheme scheme = Scheme::crank_nicolson;
  double dt = 1e-3;
  double T = 1.0;
  double fp_tol = 1e-12;  // fixed-point tolerance, relative to the state norm
  int fp_max = 200;
  int sample_every = 10;           // steps between diagnostics rows
  int snapshot_every_samples = 0;  // 0 = keep no state snapshots

  bool have_ball = false;  // diagnostic ball for the outside metrics
  Vec3 ball_center{0, 0, 0};
  double ball_radius = 0.0;
  bool refit_ball_center = false;  // re-fit the center at every sample
};

struct TrajectoryRecord {
  std::vector<DiagnosticsSample> samples;
  std::vector<std::pair<double, ComplexField>> snapshots;
  double charge_drift_rel = 0.0;
  double energy_drift_rel = 0.0;
  double boundary_mass_max = 0.0;  // max charge fraction within two cells of the boundary
  int fp_iters_max = 0;
  long fp_iters_total = 0;
  long steps = 0;
  bool completed = true;
  std::string failure;
};

/// Search for the ball center minimizing the outside gradient ratio of u:
/// coarse grid around the start point, then two local refinements.
Vec3 fit_ball_center(const RealField& u, double radius, const Vec3& start);

class DirichletSolver;

class Evolver {
 public:
  Evolver(GridPtr grid, ModelSpec model);
  ~Evolver();

  /// One time step.  dt = 0 returns the state unchanged; negative dt steps
  /// backwards.  On fixed-point failure the step is retried once as two
  /// half-steps; a second failure throws std::runtime_error.
  ComplexField step(const ComplexField& psi, double dt, const EvolveOpts& opts);

  /// March n = round(T/dt) steps with diagnostics every sample_every steps.
  TrajectoryRecord evolve(const ComplexField& psi0, const EvolveOpts& opts,
                          const std::function<void(const DiagnosticsSample&,
                                                   const ComplexField&)>& on_sample = nullptr);

  const ModelSpec& model() const { return model_; }

 private:
  ComplexField cn_step(const ComplexField& psi, double dt, const EvolveOpts& opts, int depth);
  ComplexField strang_step(const ComplexField& psi, double dt);
  void phase_half_step(ComplexField& psi, double dt_half) const;
  DiagnosticsSample diagnose(double t, const ComplexField& psi, const EvolveOpts& opts) const;

  GridPtr grid_;
  ModelSpec model_;
  std::unique_ptr<DirichletSolver> solver_;
  RealField vpot_;                   // V sampled at the nodes
  std::vector<char> near_boundary_;  // nodes within two cells of a ghost
  mutable int last_fp_iters_ = 0;
};

/// Modulus u = |psi| and phase kinetic density
/// |Im(conj(psi) grad psi)|^2 / max(|psi|^2, eps_quot^2), realizing u^2 |grad s|^2
/// without phase unwrapping.
std::pair<RealField, RealField> modulus_and_kinetic_phase(const ComplexField& psi);

}  // namespace nlse
