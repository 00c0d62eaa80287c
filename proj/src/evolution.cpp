#include "nlse/evolution.hpp"

#include <cmath>
#include <stdexcept>

#include "nlse/linear_solver.hpp"

namespace nlse {

Vec3 fit_ball_center(const RealField& u, double radius, const Vec3& start) {
  const int dim = u.grid->dim;
  Vec3 best = start;
  double best_val = grad_ratio_outside_ball(u, best, radius);
  double range = radius;
  for (int level = 0; level < 3; ++level) {
    const Vec3 base = best;
    for (int a = 0; a < dim; ++a) {
      Vec3 c = best;
      for (int k = -4; k <= 4; ++k) {
        c[a] = base[a] + range * k / 4.0;
        const double val = grad_ratio_outside_ball(u, c, radius);
        if (val < best_val) {
          best_val = val;
          best = c;
        }
      }
    }
    range *= 0.25;
  }
  return best;
}

Evolver::Evolver(GridPtr grid, ModelSpec model)
    : grid_(std::move(grid)), model_(std::move(model)) {
  solver_ = std::make_unique<DirichletSolver>(grid_);
  vpot_ = RealField(grid_);
  for (std::size_t i = 0; i < vpot_.size(); ++i)
    vpot_[i] = eval_V(model_, grid_->coord(static_cast<int32_t>(i)), grid_->dim);

  near_boundary_.assign(grid_->n_interior(), 0);
  for (std::size_t i = 0; i < grid_->n_interior(); ++i) {
    bool near = false;
    for (int a = 0; a < grid_->dim && !near; ++a) {
      for (int d = 0; d < 2 && !near; ++d) {
        const int32_t j = grid_->nbr[i][2 * a + d];
        if (j < 0)
          near = true;
        else {
          if (grid_->nbr[j][2 * a + d] < 0) near = true;
        }
      }
    }
    near_boundary_[i] = near ? 1 : 0;
  }
}

Evolver::~Evolver() = default;

void Evolver::phase_half_step(ComplexField& psi, double dt_half) const {
  const double cw = std::pow(model_.h, -model_.alpha) * 0.5;
  const double ch = dt_half / model_.h;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double a = std::abs(psi[i]);
    const double theta = ch * (cw * nonlinear_quotient(model_, a) + vpot_[i]);
    psi[i] *= cplx(std::cos(theta), -std::sin(theta));
  }
}

ComplexField Evolver::strang_step(const ComplexField& psi, double dt) {
  ComplexField out = psi;
  phase_half_step(out, 0.5 * dt);
  out = solver_->propagate(dt * 0.5 * model_.h, out);
  phase_half_step(out, 0.5 * dt);
  return out;
}

ComplexField Evolver::cn_step(const ComplexField& psi, double dt, const EvolveOpts& opts,
                              int depth) {
  const double h = model_.h;
  const cplx shift = cplx(0.0, dt * h / 4.0);
  const double cw = std::pow(h, -model_.alpha) * 0.5;
  const double scale = std::max(1.0, std::sqrt(l2_norm2(psi)));

  ComplexField m = psi;
  bool converged = false;
  int it = 0;
  for (; it < opts.fp_max; ++it) {
    // rhs = psi - (dt/(2h)) i Q(m) m, with Q the quotient + potential factor.
    ComplexField rhs = psi;
    const double cq = dt / (2.0 * h);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double a = std::abs(m[i]);
      const double q = cw * nonlinear_quotient(model_, a) + vpot_[i];
      rhs[i] -= cplx(0.0, cq * q) * m[i];
    }
    ComplexField next = solver_->solve_shifted(shift, rhs);
    double diff2 = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) diff2 += std::norm(next[i] - m[i]);
    diff2 *= grid_->cell_volume;
    m = std::move(next);
    if (std::sqrt(diff2) <= opts.fp_tol * scale) {
      converged = true;
      ++it;
      break;
    }
  }
  last_fp_iters_ += it;
  if (!converged) {
    if (depth >= 1)
      throw std::runtime_error("midpoint fixed-point failed to converge even at half dt");
    // Abort this step and retry once with two half steps.
    ComplexField half = cn_step(psi, 0.5 * dt, opts, depth + 1);
    return cn_step(half, 0.5 * dt, opts, depth + 1);
  }
  ComplexField out(psi.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * m[i] - psi[i];
  return out;
}

ComplexField Evolver::step(const ComplexField& psi, double dt, const EvolveOpts& opts) {
  detail::require_same_grid(psi.grid, grid_);
  if (dt == 0.0) return psi;
  last_fp_iters_ = 0;
  if (opts.scheme == Scheme::strang_splitting) return strang_step(psi, dt);
  return cn_step(psi, dt, opts, 0);
}

DiagnosticsSample Evolver::diagnose(double t, const ComplexField& psi,
                                    const EvolveOpts& opts) const {
  DiagnosticsSample s;
  s.t = t;
  s.charge = charge_h(psi, model_.h, model_.alpha);
  s.energy = total_energy(psi, model_);
  const RealField u = modulus(psi);
  s.J_value = action_J_h(u, model_);
  s.q = barycenter(psi);
  s.p = momentum(psi);
  s.Fb = boundary_force(u);
  s.Fv = potential_force(u, model_);
  if (opts.have_ball) {
    Vec3 c = opts.ball_center;
    if (opts.refit_ball_center) c = fit_ball_center(u, opts.ball_radius, s.q);
    s.mass_out = mass_outside_fraction(psi, c, opts.ball_radius);
    s.grad_out = grad_ratio_outside_ball(u, c, opts.ball_radius);
  }
  return s;
}

TrajectoryRecord Evolver::evolve(
    const ComplexField& psi0, const EvolveOpts& opts,
    const std::function<void(const DiagnosticsSample&, const ComplexField&)>& on_sample) {
  detail::require_same_grid(psi0.grid, grid_);
  if (!(opts.dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
  if (!(opts.T >= 0.0)) throw std::invalid_argument("evolve: T must be nonnegative");
  if (opts.sample_every < 1) throw std::invalid_argument("evolve: sample_every must be >= 1");
  const long n_steps = std::lround(opts.T / opts.dt);

  TrajectoryRecord rec;
  ComplexField psi = psi0;
  const DiagnosticsSample s0 = diagnose(0.0, psi, opts);
  rec.samples.push_back(s0);
  if (on_sample) on_sample(s0, psi);
  if (opts.snapshot_every_samples > 0) rec.snapshots.emplace_back(0.0, psi);

  auto boundary_fraction = [&](const ComplexField& f) {
    double near = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double w = std::norm(f[i]);
      tot += w;
      if (near_boundary_[i]) near += w;
    }
    return tot > 0.0 ? near / tot : 0.0;
  };
  rec.boundary_mass_max = boundary_fraction(psi);

  const double c0 = s0.charge, e0 = s0.energy;
  long sample_count = 0;
  try {
    for (long k = 1; k <= n_steps; ++k) {
      psi = step(psi, opts.dt, opts);
      rec.fp_iters_total += last_fp_iters_;
      rec.fp_iters_max = std::max(rec.fp_iters_max, last_fp_iters_);
      ++rec.steps;
      if (k % opts.sample_every == 0 || k == n_steps) {
        const double t = k * opts.dt;
        const DiagnosticsSample s = diagnose(t, psi, opts);
        rec.samples.push_back(s);
        if (on_sample) on_sample(s, psi);
        ++sample_count;
        if (opts.snapshot_every_samples > 0 &&
            (sample_count % opts.snapshot_every_samples == 0 || k == n_steps))
          rec.snapshots.emplace_back(t, psi);
        rec.charge_drift_rel = std::max(
            rec.charge_drift_rel, std::abs(s.charge - c0) / std::max(std::abs(c0), 1e-300));
        rec.energy_drift_rel = std::max(
            rec.energy_drift_rel, std::abs(s.energy - e0) / std::max(std::abs(e0), 1e-300));
        rec.boundary_mass_max = std::max(rec.boundary_mass_max, boundary_fraction(psi));
      }
    }
  } catch (const std::exception& e) {
    rec.completed = false;
    rec.failure = e.what();
  }
  return rec;
}

std::pair<RealField, RealField> modulus_and_kinetic_phase(const ComplexField& psi) {
  RealField u = modulus(psi);
  const auto dpsi = gradient(psi);
  RealField kin(psi.grid);
  const int dim = psi.grid->dim;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    double num = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double im = (std::conj(psi[i]) * dpsi[a][i]).imag();
      num += im * im;
    }
    kin[i] = num / std::max(std::norm(psi[i]), eps_quot * eps_quot);
  }
  return {std::move(u), std::move(kin)};
}

}  // namespace nlse
