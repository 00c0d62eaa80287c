#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nlse/experiments.hpp"
#include "nlse/grid.hpp"
#include "nlse/rng.hpp"

using namespace nlse;

namespace {

ModelSpec sin_model(double amp, double h = 1.0, double alpha = 1.0, double sigma = 1.0) {
  ModelSpec m;
  m.w_family = WFamily::sin_power;
  m.p = 3.0;
  m.w_amp = amp;
  m.h = h;
  m.alpha = alpha;
  m.sigma = sigma;
  m.finalize();
  return m;
}

GridPtr unit_box(int n) {
  return build_grid(DomainSpec::box_domain(1, Vec3{0, 0, 0}, Vec3{1, 0, 0}), n);
}

/// Synthetic converged profile: a centered Gaussian normalized in L2 to
/// sigma * h^{N beta / 2}, the charge normalization expected of a scaled
/// ground state.
GroundState fake_ground(const GridPtr& g, const ModelSpec& m, double width) {
  GroundState gs;
  gs.u = real_field_from(
      g, [&](const Vec3& x) { return std::exp(-x[0] * x[0] / (2.0 * width * width)); });
  const double target =
      m.sigma * std::pow(m.h, 0.5 * double(g->dim) * beta_of(m.alpha));
  gs.u *= target / std::sqrt(l2_norm2(gs.u));
  gs.converged = true;
  return gs;
}

const AdmissibleCheckLine& find_check(const AdmissibleDatum& d, const std::string& name) {
  for (const auto& c : d.checks)
    if (c.name == name) return c;
  throw std::runtime_error("check not found: " + name);
}

}  // namespace

// --------------------------------------------------------------------------
// Kendall tau

TEST_CASE("kendall tau on strictly monotone and tied series") {
  std::vector<double> x{1, 2, 3, 4};
  std::vector<double> up{2, 4, 6, 8};
  std::vector<double> down{8, 6, 4, 2};
  CHECK(kendall_tau(x, up) == 1.0);
  CHECK(kendall_tau(x, down) == -1.0);

  // One tied pair out of three contributes zero: tau = 2/3.
  std::vector<double> x3{1, 2, 3};
  std::vector<double> ytie{5, 5, 7};
  CHECK(kendall_tau(x3, ytie) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  CHECK(kendall_tau({1.0}, {2.0}) == 0.0);
  CHECK(kendall_tau({}, {}) == 0.0);
  CHECK_THROWS_AS(kendall_tau({1.0, 2.0}, {1.0}), std::invalid_argument);
}

// --------------------------------------------------------------------------
// Admissible data

TEST_CASE("admissible datum: charge renormalization and passing budgets") {
  auto m = sin_model(1.0, 0.5, 1.0, 1.0);
  auto g = unit_box(201);
  auto gs = fake_ground(g, m, 0.3);

  PhaseSpec ph;
  const double k_budget = std::pow(m.h, 0.5 * beta_of(m.alpha));  // K = 1, N = 1
  ph.k[0] = 0.9 * k_budget;
  auto d = make_admissible(gs, m, 1.0, PerturbSpec{}, ph, BudgetKind::bounded);

  CHECK(d.admissible);
  CHECK(d.reject_reason.empty());
  CHECK(charge_h(d.psi0, m.h, m.alpha) ==
        doctest::Approx(m.sigma * m.sigma).epsilon(1e-10));
  CHECK(find_check(d, "perturbation H1 budget").strict);
  CHECK(!find_check(d, "phase gradient budget").strict);
  CHECK(d.certificate().find("[ok]") != std::string::npos);
  CHECK(d.certificate().find("VIOLATED") == std::string::npos);

  // The linear phase must actually be imprinted: modulus unchanged, value
  // rotated relative to the real profile away from the center.
  const std::size_t mid = g->n_interior() / 2;
  CHECK(std::abs(d.psi0[mid]) == doctest::Approx(d.u[mid]).epsilon(1e-12));
  CHECK(std::abs(std::imag(d.psi0[10])) > 0.0);

  // A mildly mis-normalized profile is renormalized; the tiny correction is
  // booked against the perturbation budget, not silently dropped.
  auto gs2 = gs;
  gs2.u *= 1.0001;
  auto d2 = make_admissible(gs2, m, 1.0, PerturbSpec{}, ph, BudgetKind::bounded);
  CHECK(d2.admissible);
  CHECK(charge_h(d2.psi0, m.h, m.alpha) ==
        doctest::Approx(m.sigma * m.sigma).epsilon(1e-10));
  const auto& wline = find_check(d2, "perturbation H1 budget");
  CHECK(wline.value > 0.0);
  CHECK(wline.value < 1e-3);
}

TEST_CASE("admissible datum: phase budget rejection and the whole-space budget") {
  auto m = sin_model(1.0, 0.5, 1.0, 1.0);
  auto g = unit_box(201);
  auto gs = fake_ground(g, m, 0.3);

  PhaseSpec ph;
  const double k_budget = std::pow(m.h, 0.5 * beta_of(m.alpha));
  ph.k[0] = 1.01 * k_budget;

  auto rej = make_admissible(gs, m, 1.0, PerturbSpec{}, ph, BudgetKind::bounded);
  CHECK(!rej.admissible);
  CHECK(rej.reject_reason == "phase gradient budget");
  CHECK(rej.certificate().find("VIOLATED") != std::string::npos);

  // The same kick is within the O(1) whole-space budget |k| <= K.
  auto acc = make_admissible(gs, m, 1.0, PerturbSpec{}, ph, BudgetKind::whole_space);
  CHECK(acc.admissible);
}

TEST_CASE("admissible datum: potential budget tightens on bounded domains") {
  auto m = sin_model(1.0, 0.5, 1.0, 1.0);
  m.v_family = VFamily::quadratic_well;
  m.v2 = 25.0;
  m.finalize();
  auto g = unit_box(201);
  auto gs = fake_ground(g, m, 0.3);

  auto rej = make_admissible(gs, m, 1.0, PerturbSpec{}, PhaseSpec{}, BudgetKind::bounded);
  CHECK(!rej.admissible);
  CHECK(rej.reject_reason == "potential energy budget");
  // The stored value must equal the integral over the renormalized profile.
  double v_int = 0.0;
  for (std::size_t i = 0; i < g->n_interior(); ++i)
    v_int += eval_V(m, g->coord(i), 1) * rej.u[i] * rej.u[i];
  v_int *= g->cell_volume;
  CHECK(find_check(rej, "potential energy budget").value ==
        doctest::Approx(v_int).epsilon(1e-12));

  // Whole-space budget K h^{N beta - 2 alpha} is larger than one here.
  auto acc = make_admissible(gs, m, 1.0, PerturbSpec{}, PhaseSpec{}, BudgetKind::whole_space);
  CHECK(acc.admissible);
}

TEST_CASE("admissible datum: perturbation is realized and recorded") {
  auto m = sin_model(1.0, 0.5, 1.0, 1.0);
  auto g = unit_box(201);
  auto gs = fake_ground(g, m, 0.3);

  PerturbSpec w;
  w.target_h1 = 0.1;  // well inside the K h^alpha = 0.5 budget
  w.seed = 7;
  auto d = make_admissible(gs, m, 1.0, w, PhaseSpec{}, BudgetKind::bounded);
  CHECK(d.admissible);
  const auto& line = find_check(d, "perturbation H1 budget");
  CHECK(line.value > 0.0);
  CHECK(line.value < line.bound);
  // Same seed, same datum.
  auto d2 = make_admissible(gs, m, 1.0, w, PhaseSpec{}, BudgetKind::bounded);
  for (std::size_t i = 0; i < d.u.size(); ++i) CHECK(d.u[i] == d2.u[i]);
}

TEST_CASE("admissible datum: vanished profile throws") {
  auto m = sin_model(1.0);
  auto g = unit_box(51);
  GroundState gs;
  gs.u = RealField(g);  // all zeros
  CHECK_THROWS_AS(make_admissible(gs, m, 1.0, PerturbSpec{}, PhaseSpec{}, BudgetKind::bounded),
                  std::runtime_error);
}

// --------------------------------------------------------------------------
// Orbit distance

TEST_CASE("orbit distance vanishes on the phase orbit and sizes perturbations") {
  auto g = unit_box(101);
  auto u = real_field_from(g, [](const Vec3& x) { return std::exp(-3.0 * x[0] * x[0]); });

  // Phase aligned with a grid angle: distance is zero up to rounding.
  const double th0 = 2.0 * M_PI * 17.0 / 256.0;
  ComplexField psi = to_complex(u);
  for (auto& z : psi.v) z *= std::polar(1.0, th0);
  CHECK(orbit_distance(psi, u, 256) <= 1e-7);

  // A perturbation off the orbit: bounded above by its own H1 size (theta = 0
  // is one of the candidates) and strictly positive.
  Rng rng(11);
  RealField wr = random_h1_field(g, rng, 0.01);
  ComplexField pert = to_complex(u);
  for (std::size_t i = 0; i < pert.size(); ++i) pert.v[i] += wr[i];
  const double wsize = h1_norm(wr);
  const double dist = orbit_distance(pert, u, 256);
  CHECK(dist > 0.0);
  CHECK(dist <= wsize * (1.0 + 1e-9));

  CHECK_THROWS_AS(orbit_distance(psi, u, 0), std::invalid_argument);
}

// --------------------------------------------------------------------------
// Stability verdict (pure function on stored points)

namespace {

std::vector<SweepPoint> stability_points(const std::vector<double>& deltas,
                                         const std::vector<double>& Ds) {
  std::vector<SweepPoint> pts;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    SweepPoint p;
    p.param = deltas[i];
    p.metrics["delta_abs"] = deltas[i];
    p.metrics["D_max"] = Ds[i];
    p.metrics["n_included"] = 4;
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_CASE("stability verdict: monotone decreasing response passes") {
  auto pts = stability_points({0.1, 0.03, 0.01}, {0.25, 0.08, 0.03});
  auto v = stability_verdict(pts, 1e-3, 5.0);
  CHECK(v.ok);
  CHECK(v.tau_delta == 1.0);
  CHECK(v.monotone_ok);
  CHECK(v.bound_ok);
  CHECK(v.D_smallest == 0.03);
  CHECK(v.bound_smallest == doctest::Approx(5.0 * 0.01 + 1e-3).epsilon(1e-15));
}

TEST_CASE("stability verdict: non-monotone response fails") {
  auto pts = stability_points({0.1, 0.03, 0.01}, {0.25, 0.03, 0.08});
  auto v = stability_verdict(pts, 1e-3, 5.0);
  CHECK(!v.ok);
  CHECK(!v.monotone_ok);
  CHECK(v.tau_delta < 1.0);
}

TEST_CASE("stability verdict: smallest-delta bound violation fails") {
  auto pts = stability_points({0.1, 0.03, 0.01}, {0.25, 0.08, 0.06});
  auto v = stability_verdict(pts, 1e-3, 5.0);
  CHECK(!v.ok);
  CHECK(v.monotone_ok);
  CHECK(!v.bound_ok);
  CHECK(v.D_smallest == 0.06);
}

TEST_CASE("stability verdict: invalid points are excluded") {
  auto pts = stability_points({0.1, 0.03, 0.01}, {0.25, 99.0, 0.03});
  pts[1].valid = false;  // absurd middle value must not count
  auto v = stability_verdict(pts, 1e-3, 5.0);
  CHECK(v.ok);

  pts[0].valid = false;
  pts[2].valid = false;
  auto few = stability_verdict(pts, 1e-3, 5.0);
  CHECK(!few.ok);
  CHECK(few.note.find("fewer than two") != std::string::npos);
}

// --------------------------------------------------------------------------
// Localization verdict and profile lookup

namespace {

SweepPoint loc_point(double h, double pass, double R_fit, std::vector<double> profile,
                     double R_cap) {
  SweepPoint p;
  p.param = h;
  p.metrics["pass"] = pass;
  p.metrics["R_fit"] = R_fit;
  p.metrics["R_cap"] = R_cap;
  p.profile = std::move(profile);
  return p;
}

}  // namespace

TEST_CASE("point metric lookup is conservative and bounded by the cap") {
  auto p = loc_point(0.4, 1.0, 2.0, {10, 20, 30, 40}, 4.0);
  CHECK(point_metric_at_radius(p, 1.0) == 10.0);
  CHECK(point_metric_at_radius(p, 1.5) == 10.0);   // round down to the grid
  CHECK(point_metric_at_radius(p, 1.999) == 10.0);
  CHECK(point_metric_at_radius(p, 2.0) == 20.0);
  CHECK(point_metric_at_radius(p, 4.0) == 40.0);
  CHECK(std::isinf(point_metric_at_radius(p, 4.2)));  // beyond the stored cap
  CHECK(std::isinf(point_metric_at_radius(p, 0.5)));  // below the first grid radius

  SweepPoint bare;
  CHECK(std::isinf(point_metric_at_radius(bare, 1.0)));
}

TEST_CASE("localization verdict: full passing suffix with tight radii") {
  std::vector<double> prof{0.5, 0.01, 0.005, 0.002, 0.001, 0.001, 0.001, 0.001};
  std::vector<SweepPoint> pts{
      loc_point(0.4, 1.0, 2.0, prof, 8.0),
      loc_point(0.3, 1.0, 2.1, prof, 8.0),
      loc_point(0.2, 1.0, 2.2, prof, 8.0),
  };
  auto v = localization_verdict(pts, 0.05, 0.2);
  CHECK(v.ok);
  CHECK(v.n_pass == 3);
  CHECK(v.h0 == 0.4);
  CHECK(v.R_hat == 2.2);
  CHECK(v.spread == doctest::Approx(0.2 / 2.1).epsilon(1e-12));
  CHECK(v.common_ok);
  CHECK(v.spread_ok);
}

TEST_CASE("localization verdict: failing head shortens the suffix") {
  std::vector<double> prof{0.5, 0.01, 0.005, 0.002, 0.001, 0.001, 0.001, 0.001};
  std::vector<SweepPoint> pts{
      loc_point(0.4, 0.0, 7.0, prof, 8.0),
      loc_point(0.3, 1.0, 2.1, prof, 8.0),
      loc_point(0.2, 1.0, 2.2, prof, 8.0),
  };
  auto v = localization_verdict(pts, 0.05, 0.2);
  CHECK(v.ok);
  CHECK(v.n_pass == 2);
  CHECK(v.h0 == 0.3);
  CHECK(v.R_hat == 2.2);
}

TEST_CASE("localization verdict: radius spread over tolerance fails") {
  std::vector<double> prof{0.5, 0.01, 0.005, 0.002, 0.001, 0.001, 0.001, 0.001};
  std::vector<SweepPoint> pts{
      loc_point(0.4, 1.0, 2.0, prof, 8.0),
      loc_point(0.3, 1.0, 2.1, prof, 8.0),
      loc_point(0.2, 1.0, 3.0, prof, 8.0),
  };
  auto v = localization_verdict(pts, 0.05, 0.2);
  CHECK(!v.ok);
  CHECK(!v.spread_ok);
  CHECK(v.R_hat == 3.0);
  CHECK(v.note.find("over tolerance") != std::string::npos);
}

TEST_CASE("localization verdict: common radius must hold for every passing point") {
  std::vector<double> good{0.5, 0.01, 0.005, 0.002, 0.001, 0.001, 0.001, 0.001};
  std::vector<double> bad{0.5, 0.2, 0.005, 0.002, 0.001, 0.001, 0.001, 0.001};
  std::vector<SweepPoint> pts{
      loc_point(0.4, 1.0, 2.0, bad, 8.0),  // 0.2 >= eps at the common radius
      loc_point(0.3, 1.0, 2.1, good, 8.0),
      loc_point(0.2, 1.0, 2.2, good, 8.0),
  };
  auto v = localization_verdict(pts, 0.05, 0.2);
  CHECK(!v.ok);
  CHECK(!v.common_ok);
  CHECK(v.spread_ok);
}

TEST_CASE("localization verdict: no trailing pass run") {
  std::vector<double> prof{0.5, 0.01, 0.005, 0.002, 0.001, 0.001, 0.001, 0.001};
  std::vector<SweepPoint> pts{
      loc_point(0.4, 1.0, 2.0, prof, 8.0),
      loc_point(0.3, 1.0, 2.1, prof, 8.0),
      loc_point(0.2, 0.0, 2.2, prof, 8.0),  // smallest h fails: no suffix
  };
  auto v = localization_verdict(pts, 0.05, 0.2);
  CHECK(!v.ok);
  CHECK(v.n_pass == 0);
  CHECK(v.note.find("no trailing run") != std::string::npos);

  pts[2].metrics["pass"] = 1.0;
  pts[2].valid = false;  // invalid also breaks the suffix
  auto v2 = localization_verdict(pts, 0.05, 0.2);
  CHECK(!v2.ok);
  CHECK(v2.n_pass == 0);
}

// --------------------------------------------------------------------------
// Serialization round trip

TEST_CASE("sweep result survives a json round trip") {
  SweepResult r;
  r.kind = "l2_localization";
  r.params["eps"] = 0.05;
  r.params["T"] = 5.0;
  SweepPoint a;
  a.param = 0.4;
  a.valid = true;
  a.note = "all good, \"quoted\" and comma, separated";
  a.metrics["pass"] = 1.0;
  a.metrics["R_fit"] = 2.125;
  a.profile = {0.25, 0.125, 0.0625};
  SweepPoint b;
  b.param = 0.3;
  b.valid = false;
  b.note = "member excluded";
  b.metrics["pass"] = 0.0;
  r.points = {a, b};
  r.summary["h0"] = 0.4;
  r.verdict = true;
  r.verdict_note = "holds";

  const std::string text = sweep_result_json(r);
  CHECK(text.back() == '\n');
  auto rr = sweep_result_from_json(text);
  CHECK(rr.kind == r.kind);
  CHECK(rr.params == r.params);
  CHECK(rr.summary == r.summary);
  CHECK(rr.verdict == r.verdict);
  CHECK(rr.verdict_note == r.verdict_note);
  REQUIRE(rr.points.size() == 2);
  CHECK(rr.points[0].param == a.param);
  CHECK(rr.points[0].note == a.note);
  CHECK(rr.points[0].metrics == a.metrics);
  CHECK(rr.points[0].profile == a.profile);
  CHECK(rr.points[1].valid == b.valid);
  CHECK(rr.points[1].profile.empty());

  // Serialization is deterministic: a second dump is byte identical.
  CHECK(sweep_result_json(r) == text);
}

// --------------------------------------------------------------------------
// Barycenter confinement

TEST_CASE("barycenter confinement counts violations against the stated bound") {
  DomainSpec dom = DomainSpec::box_domain(1, Vec3{0, 0, 0}, Vec3{1, 0, 0});
  TrajectoryRecord traj;
  for (int i = 0; i < 5; ++i) {
    DiagnosticsSample s;
    s.t = 0.01 * i;
    s.q = Vec3{0.01 * i, 0.0, 0.0};
    traj.samples.push_back(s);
  }
  // bound = diam * eps + h^beta R = 2 * 0.02 + 0.25 * 0.02 = 0.045
  auto rep = barycenter_confinement(traj, Vec3{0, 0, 0}, 0.02, 0.5, 2.0, 0.02, dom);
  CHECK(rep.bound == doctest::Approx(0.045).epsilon(1e-12));
  CHECK(rep.ok);
  CHECK(rep.n_violations == 0);
  CHECK(rep.max_excursion == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(rep.worst_margin == doctest::Approx(0.005).epsilon(1e-9));

  traj.samples[4].q[0] = 0.05;  // one sample beyond the bound
  auto bad = barycenter_confinement(traj, Vec3{0, 0, 0}, 0.02, 0.5, 2.0, 0.02, dom);
  CHECK(!bad.ok);
  CHECK(bad.n_violations == 1);
  CHECK(bad.worst_margin < 0.0);
}

// --------------------------------------------------------------------------
// Force-law stencils on synthetic trajectories

namespace {

/// Record with q(t) a quartic, charge constant, and the momentum / force
/// series chosen so that both laws hold exactly for the five-point stencils.
TrajectoryRecord polynomial_record(int n, double dts, double Q_plain, double h, double qfac) {
  auto q = [](double t) { return 1.0 + t + t * t + t * t * t + t * t * t * t; };
  auto qd = [](double t) { return 1.0 + 2.0 * t + 3.0 * t * t + 4.0 * t * t * t; };
  auto qdd = [](double t) { return 2.0 + 6.0 * t + 12.0 * t * t; };
  TrajectoryRecord traj;
  for (int i = 0; i < n; ++i) {
    const double t = i * dts;
    DiagnosticsSample s;
    s.t = t;
    s.charge = Q_plain / qfac;  // stored as the scaled charge
    s.q = Vec3{q(t), 0.0, 0.0};
    s.p = Vec3{Q_plain * qd(t) / h, 0.0, 0.0};       // dX/dt = h p
    s.Fv = Vec3{Q_plain * qdd(t), 0.0, 0.0};         // q'' = (Fv + h^2 Fb)/Q
    s.Fb = Vec3{0.0, 0.0, 0.0};
    traj.samples.push_back(s);
  }
  return traj;
}

}  // namespace

TEST_CASE("force-law stencils are exact on polynomial data at h = 1") {
  auto m = sin_model(1.0);
  auto traj = polynomial_record(11, 0.01, 2.0, 1.0, 1.0);
  auto rep = newton_law_check(traj, m, 1);
  CHECK(rep.ok);
  CHECK(rep.n_checked == 7);
  CHECK(rep.dt_samples == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(rep.momentum_gap_max <= 1e-9);
  CHECK(rep.newton_gap_max <= 1e-8);
  CHECK(rep.force_V_max == doctest::Approx(2.0 + 6.0 * 0.08 + 12.0 * 0.0064).epsilon(1e-6));
  CHECK(rep.force_b_max == 0.0);
}

TEST_CASE("force-law check honors the scaled-charge factor at h != 1") {
  auto m = sin_model(1.0, 0.5, 2.0);  // beta = 2, qfac = h^2 = 0.25 in 1D
  const double qfac = std::pow(m.h, beta_of(m.alpha));
  auto traj = polynomial_record(11, 0.01, 3.0, m.h, qfac);
  auto rep = newton_law_check(traj, m, 1);
  CHECK(rep.ok);
  CHECK(rep.momentum_gap_max <= 1e-9);
  CHECK(rep.newton_gap_max <= 1e-8);
}

TEST_CASE("force-law check rejects short or unevenly sampled records") {
  auto m = sin_model(1.0);
  auto short_traj = polynomial_record(4, 0.01, 2.0, 1.0, 1.0);
  auto rep = newton_law_check(short_traj, m, 1);
  CHECK(!rep.ok);
  CHECK(rep.note.find("five") != std::string::npos);

  auto uneven = polynomial_record(11, 0.01, 2.0, 1.0, 1.0);
  uneven.samples[5].t += 0.003;
  auto rep2 = newton_law_check(uneven, m, 1);
  CHECK(!rep2.ok);
  CHECK(rep2.note.find("not uniformly spaced") != std::string::npos);
}

// --------------------------------------------------------------------------
// Worker pool

TEST_CASE("run_jobs is slot deterministic and propagates exceptions") {
  auto build = [](std::vector<double>& out) {
    std::vector<std::function<void()>> tasks;
    out.assign(23, 0.0);
    for (int i = 0; i < 23; ++i)
      tasks.push_back([&out, i] { out[std::size_t(i)] = std::sin(1.0 + i) * i; });
    return tasks;
  };
  std::vector<double> serial, parallel;
  auto t1 = build(serial);
  run_jobs(1, t1);
  auto t2 = build(parallel);
  run_jobs(4, t2);
  CHECK(serial == parallel);

  std::vector<std::function<void()>> bad;
  std::atomic<int> done{0};
  for (int i = 0; i < 8; ++i)
    bad.push_back([&done, i] {
      if (i == 5) throw std::runtime_error("task failed");
      ++done;
    });
  CHECK_THROWS_AS(run_jobs(3, bad), std::runtime_error);
}

// --------------------------------------------------------------------------
// Orbital stability glue (small end-to-end run)

TEST_CASE("orbital stability run produces gated, reproducible ensembles") {
  auto m = sin_model(1.0);
  auto g = unit_box(101);
  StabilityOpts opts;
  opts.deltas_rel = {3e-2, 1e-2};
  opts.ensemble = 2;
  opts.seed = 5;
  opts.evolve.dt = 1e-3;
  opts.evolve.T = 0.05;
  opts.evolve.sample_every = 10;
  opts.min_opts.seed = 1;

  auto r = orbital_stability_run(g, m, 1.0, opts);
  CHECK(r.kind == "orbital_stability");
  REQUIRE(r.points.size() == 2);
  CHECK(r.summary.at("gs_converged") == 1.0);
  // The unperturbed run's orbit distance is limited by the phase-grid
  // resolution: at worst half an angle step times the profile's H1 size.
  CHECK(r.summary.at("floor_D") >= 0.0);
  CHECK(r.summary.at("floor_D") <= (M_PI / opts.n_phase_grid) * r.summary.at("u_h1"));
  for (const auto& p : r.points) {
    CHECK(p.valid);
    CHECK(p.metrics.at("n_included") == 2.0);
    CHECK(p.metrics.at("D_max") > 0.0);
    // Perturbation sizes are recorded relative to the ground-state H1 norm.
    CHECK(p.metrics.at("delta_abs") ==
          doctest::Approx(p.metrics.at("delta_rel") * r.summary.at("u_h1")).epsilon(1e-12));
  }
  // tau over list order is the negative of tau over delta.
  CHECK(r.summary.at("tau_list_order") == -r.summary.at("tau_delta"));

  // Same options, two workers: identical output byte for byte.
  StabilityOpts par = opts;
  par.jobs = 2;
  auto r2 = orbital_stability_run(g, m, 1.0, par);
  CHECK(sweep_result_json(r2) == sweep_result_json(r));
}
