#include "nlse/ground_state.hpp"

#include <cmath>
#include <stdexcept>

#include "nlse/linear_solver.hpp"
#include "nlse/rng.hpp"

namespace nlse {

double lagrange_multiplier(const RealField& u, const ModelSpec& model, double kappa,
                           double w_scale) {
  double wpu = 0.0;
  for (double s : u.v) wpu += eval_Wprime(model, s) * s;
  wpu *= u.grid->cell_volume;
  const double n2 = l2_norm2(u);
  if (n2 <= 0.0) throw std::invalid_argument("lagrange_multiplier: zero field");
  return (kappa * dirichlet_energy(u) + w_scale * wpu) / n2;
}

double residual_norm(const RealField& u, double lambda, const ModelSpec& model, double kappa,
                     double w_scale) {
  RealField lap = laplacian(u);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = -kappa * lap[i] + w_scale * eval_Wprime(model, u[i]) - lambda * u[i];
    s += r * r;
  }
  return std::sqrt(s * u.grid->cell_volume);
}

namespace {

void clamp_and_normalize(RealField& u, double sigma) {
  for (auto& x : u.v) x = std::abs(x);
  const double n = std::sqrt(l2_norm2(u));
  if (n <= 0.0) throw std::runtime_error("flow iterate collapsed to zero");
  const double s = sigma / n;
  for (auto& x : u.v) x *= s;
}

// Curvature bound for the damping shift: max of |w_scale W''| over the
// iterate's amplitudes.
double wsecond_bound(const ModelSpec& model, const RealField& u, double w_scale) {
  double c = 0.0;
  for (double s : u.v) c = std::max(c, std::abs(w_scale * eval_Wsecond(model, s)));
  return c;
}

struct FlowOutcome {
  RealField u;
  double J = 0.0, lambda = 0.0, residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

FlowOutcome run_flow(const ModelSpec& model, double sigma, const MinimizeOpts& opts,
                     RealField start, DirichletSolver& solver) {
  FlowOutcome out;
  RealField u = std::move(start);
  clamp_and_normalize(u, sigma);
  double J = action_scaled(u, model, opts.kappa, opts.w_scale);
  double dt = opts.dt_init;
  const double dt_min = 1e-12, dt_max = 64.0 * opts.dt_init;

  auto check_converged = [&](const RealField& v) {
    const double lam = lagrange_multiplier(v, model, opts.kappa, opts.w_scale);
    const double res = residual_norm(v, lam, model, opts.kappa, opts.w_scale);
    out.lambda = lam;
    out.residual = res;
    return res <= opts.tol_res * h1_norm(v);
  };

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    // Preconditioned residual step v = u - dt (I + dt kappa A + dt c)^{-1} grad,
    // with grad = kappa A u + w W'(u) - lambda u.  The Lagrange-multiplier shift
    // makes every constrained critical point an exact fixed point at any dt, and
    // the scalar damping c (a bound on the nonlinear curvature) keeps the step
    // stable for strongly nonconvex W.  The kappa A terms cancel in the rhs.
    const double lam = lagrange_multiplier(u, model, opts.kappa, opts.w_scale);
    const double c = wsecond_bound(model, u, opts.w_scale) + std::abs(lam);
    const double denom = 1.0 + dt * c;
    RealField rhs = u;
    for (std::size_t i = 0; i < u.size(); ++i)
      rhs[i] = (denom * u[i] - dt * (opts.w_scale * eval_Wprime(model, u[i]) - lam * u[i])) /
               denom;
    RealField v = solver.solve_shifted(dt * opts.kappa / denom, rhs);
    clamp_and_normalize(v, sigma);
    const double Jv = action_scaled(v, model, opts.kappa, opts.w_scale);
    if (Jv <= J + 1e-14 * (1.0 + std::abs(J))) {
      u = std::move(v);
      J = Jv;
      dt = std::min(dt * 1.25, dt_max);
      if (iter % 10 == 0 && check_converged(u)) {
        out.converged = true;
        break;
      }
    } else {
      dt *= 0.5;
      if (dt < dt_min) {
        // No descent direction at the smallest step: either converged or stuck.
        out.converged = check_converged(u);
        break;
      }
    }
  }
  if (!out.converged) out.converged = check_converged(u);
  out.u = std::move(u);
  out.J = J;
  out.iterations = iter;
  return out;
}

RealField centered_bump(const GridPtr& g, double width) {
  Vec3 lo, hi;
  g->domain.bounding_box(lo, hi);
  RealField u(g);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec3 x = g->coord(static_cast<int32_t>(i));
    double r2 = 0.0;
    for (int a = 0; a < g->dim; ++a) {
      const double mid = 0.5 * (lo[a] + hi[a]);
      const double d = (x[a] - mid) / width;
      r2 += d * d;
    }
    u[i] = std::exp(-0.5 * r2);
  }
  return u;
}

}  // namespace

GroundState minimize_on_sphere(const GridPtr& grid, const ModelSpec& model, double sigma,
                               const MinimizeOpts& opts,
                               const std::vector<RealField>& extra_starts) {
  if (!(sigma > 0.0)) throw std::invalid_argument("minimize_on_sphere: sigma must be positive");
  DirichletSolver solver(grid);
  GroundState best;
  bool have_best = false;
  double J_conv_min = 0.0, J_conv_max = 0.0;
  int n_conv = 0;

  // Match the start widths to the intrinsic length of the energy,
  // sqrt(kappa / w_scale): below it the gradient term dominates, above it the
  // potential does, so minimizers concentrate on that scale.  Capping by the
  // bounding-box half-width keeps starts inside small domains, and on O(1)
  // domains with kappa = w_scale = 1 the widths reduce to the domain-sized
  // bump used before.
  Vec3 blo, bhi;
  grid->domain.bounding_box(blo, bhi);
  double hw_min = 1e300;
  for (int a = 0; a < grid->dim; ++a) hw_min = std::min(hw_min, 0.5 * (bhi[a] - blo[a]));
  const double ell = std::sqrt(opts.kappa / opts.w_scale);
  const double start_width = std::min(hw_min, ell);

  const int n_standard = std::max(1, opts.n_starts);
  const int n_total = n_standard + static_cast<int>(extra_starts.size());
  for (int s = 0; s < n_total; ++s) {
    RealField start;
    if (s >= n_standard) {
      start = extra_starts[static_cast<std::size_t>(s - n_standard)];
    } else if (s == 0) {
      start = centered_bump(grid, 0.35 * start_width);
    } else {
      Rng rng(mix_seed(opts.seed, static_cast<uint64_t>(s)));
      start = random_bump(grid, rng, start_width);
      // Superpose a little roughness so distinct basins get probed.
      RealField w = random_h1_field(grid, rng, 0.3, 6);
      start += w;
    }
    FlowOutcome fo = run_flow(model, sigma, opts, std::move(start), solver);
    if (fo.converged) {
      if (n_conv == 0) {
        J_conv_min = J_conv_max = fo.J;
      } else {
        J_conv_min = std::min(J_conv_min, fo.J);
        J_conv_max = std::max(J_conv_max, fo.J);
      }
      ++n_conv;
    }
    const bool better = !have_best || (fo.converged && !best.converged) ||
                        (fo.converged == best.converged && fo.J < best.J_min);
    if (better) {
      best.u = std::move(fo.u);
      best.lambda = fo.lambda;
      best.J_min = fo.J;
      best.residual = fo.residual;
      best.iterations = fo.iterations;
      best.converged = fo.converged;
      have_best = true;
    }
  }
  best.n_converged = n_conv;
  best.start_spread = (n_conv > 0) ? (J_conv_max - J_conv_min) : 0.0;
  best.dispersal_suspect = !best.converged && std::abs(best.J_min) < 1e-6;
  return best;
}

// ---------------------------------------------------------------------------

namespace {

// Copy a field onto another grid node-by-node (coordinates must land on
// lattice nodes of the target); nodes without a source value stay zero.
RealField zero_extend(const RealField& src, const GridPtr& dst) {
  RealField out(dst);
  const Grid& g = *dst;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Vec3 x = src.grid->coord(static_cast<int32_t>(i));
    long flat = 0, mul = 1;
    bool on_lattice = true;
    for (int a = 0; a < g.dim; ++a) {
      const double t = (x[a] - g.origin[a]) / g.dx[a];
      const long k = std::lround(t);
      if (std::abs(t - k) > 1e-6 || k < 0 || k >= g.n_axis) {
        on_lattice = false;
        break;
      }
      flat += k * mul;
      mul *= g.n_axis;
    }
    if (!on_lattice) continue;
    const int32_t id = g.interior_id[static_cast<std::size_t>(flat)];
    if (id >= 0) out[static_cast<std::size_t>(id)] = src[i];
  }
  return out;
}

}  // namespace

BallSweepResult ball_infimum_sweep(const ModelSpec& model, int dim,
                                   const std::vector<double>& radii, double dx, double sigma,
                                   const MinimizeOpts& opts) {
  if (radii.empty()) throw std::invalid_argument("ball_infimum_sweep: no radii");
  BallSweepResult res;
  res.dx = dx;
  for (double r : radii) {
    const double steps = 2.0 * r / dx;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
      throw std::invalid_argument(
          "ball_infimum_sweep: each diameter must be an integer multiple of dx so node sets nest");
    const int nodes = static_cast<int>(rounded) + 1;
    const auto dom = DomainSpec::ball_domain(dim, Vec3{0, 0, 0}, r);
    auto grid = build_grid(dom, nodes);
    BallSweepPoint pt;
    pt.radius = r;
    // Continuation: the previous ball's minimizer, extended by zero, is an
    // admissible profile on the bigger ball (the node sets nest), so feeding
    // it to the flow makes the computed chain inherit the m(B_r) >= m(B_R)
    // monotonicity instead of relying on the multistart rediscovering the
    // same basin at every radius.
    std::vector<RealField> warm;
    if (!res.points.empty())
      warm.push_back(zero_extend(res.points.back().gs.u, grid));
    pt.gs = minimize_on_sphere(grid, model, sigma, opts, warm);
    pt.m = pt.gs.J_min;
    res.points.push_back(std::move(pt));
  }
  res.monotone = true;
  for (std::size_t i = 0; i + 1 < res.points.size(); ++i) {
    const double tol =
        10.0 * std::max(res.points[i].gs.residual, res.points[i + 1].gs.residual);
    res.tol_mono.push_back(tol);
    if (res.points[i + 1].m > res.points[i].m + tol) res.monotone = false;
  }
  if (res.points.size() >= 2) {
    const auto& a = res.points[res.points.size() - 2];
    const auto& b = res.points.back();
    res.plateau_rel_gap = std::abs(b.m - a.m) / std::max(std::abs(b.m), 1e-300);
  }
  return res;
}

namespace {

// C1 descending smoothstep: 1 below r/2, 0 above r, |slope| <= 3/r.
double cutoff_chi(double dist, double r) {
  if (dist <= 0.5 * r) return 1.0;
  if (dist >= r) return 0.0;
  const double t = (dist - 0.5 * r) / (0.5 * r);
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

}  // namespace

CutoffResult cutoff_comparison(const ModelSpec& model, double R_big,
                               const std::vector<double>& radii, double dx, double sigma,
                               const MinimizeOpts& opts) {
  CutoffResult out;
  const double steps = 2.0 * R_big / dx;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("cutoff_comparison: 2 R_big must be a multiple of dx");
  const auto big_dom = DomainSpec::ball_domain(1, Vec3{0, 0, 0}, R_big);
  auto big_grid = build_grid(big_dom, static_cast<int>(std::round(steps)) + 1);
  out.big = minimize_on_sphere(big_grid, model, sigma, opts);

  for (double r : radii) {
    if (!(r <= R_big)) throw std::invalid_argument("cutoff_comparison: radii must be <= R_big");
    // chi_r * u_big, restricted to the ball grid and renormalized.
    const double rsteps = 2.0 * r / dx;
    if (std::abs(rsteps - std::round(rsteps)) > 1e-9 * std::max(1.0, rsteps))
      throw std::invalid_argument("cutoff_comparison: each diameter must be a multiple of dx");
    const auto dom = DomainSpec::ball_domain(1, Vec3{0, 0, 0}, r);
    auto grid = build_grid(dom, static_cast<int>(std::round(rsteps)) + 1);
    RealField v(grid);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec3 x = grid->coord(static_cast<int32_t>(i));
      double d2 = 0.0;
      for (int a = 0; a < grid->dim; ++a) d2 += x[a] * x[a];
      const double dist = std::sqrt(d2);
      // Node sets nest: the same coordinate indexes the big-ball field.
      const double xs = x[0];
      const double big_step = (xs + R_big) / dx;
      const long k = std::lround(big_step);
      double ubig = 0.0;
      if (std::abs(big_step - k) < 1e-6 && k > 0 &&
          k < static_cast<long>(out.big.u.grid->n_axis) - 1)
        ubig = out.big.u[static_cast<std::size_t>(k - 1)];
      v[i] = cutoff_chi(dist, r) * ubig;
    }
    const double n = std::sqrt(l2_norm2(v));
    if (n <= 0.0) throw std::runtime_error("cutoff_comparison: cutoff annihilated the profile");
    for (auto& x : v.v) x *= sigma / n;

    CutoffPoint pt;
    pt.r = r;
    pt.J_chi = action_J(v, model);
    pt.m_ball = minimize_on_sphere(grid, model, sigma, opts).J_min;
    pt.excess = pt.J_chi - pt.m_ball;
    out.points.push_back(pt);
  }
  return out;
}

RescaledCheck rescaled_infimum_check(const ModelSpec& model, const DomainSpec& domain,
                                     int nodes_per_axis, const MinimizeOpts& opts) {
  RescaledCheck out;
  const double h = model.h, alpha = model.alpha;
  const double nbeta = domain.dim * beta_of(alpha);

  // h-scaled problem on the original domain with C_h = 1, i.e. the plain
  // L2 norm pinned to h^{N beta / 2}.
  auto base_grid = build_grid(domain, nodes_per_axis);
  MinimizeOpts base_opts = opts;
  base_opts.kappa = h * h;
  base_opts.w_scale = std::pow(h, -alpha);
  out.base = minimize_on_sphere(base_grid, model, std::pow(h, 0.5 * nbeta), base_opts);
  out.m_h = out.base.J_min * std::pow(h, -nbeta);

  // Unscaled problem on the inflated domain with sigma = 1.
  const DomainSpec dom_h = inflate_domain(domain, h, alpha);
  auto infl_grid = build_grid(dom_h, nodes_per_axis);
  MinimizeOpts infl_opts = opts;
  infl_opts.kappa = 1.0;
  infl_opts.w_scale = 1.0;
  out.inflated = minimize_on_sphere(infl_grid, model, 1.0, infl_opts);
  out.m_inflated_scaled = std::pow(h, -alpha) * out.inflated.J_min;

  out.rel_gap = std::abs(out.m_h - out.m_inflated_scaled) /
                std::max({std::abs(out.m_h), std::abs(out.m_inflated_scaled), 1e-300});
  out.both_converged = out.base.converged && out.inflated.converged;
  return out;
}

}  // namespace nlse
