#include "nlse/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "nlse/grid.hpp"
#include "nlse/rng.hpp"

namespace nlse {

namespace {

double vec_norm(const Vec3& v, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += v[a] * v[a];
  return std::sqrt(s);
}

Vec3 vec_sub(const Vec3& a, const Vec3& b) {
  return Vec3{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

}  // namespace

// --------------------------------------------------------------------------
// Admissible data

AdmissibleDatum make_admissible(const GroundState& ground, const ModelSpec& model, double K,
                                const PerturbSpec& w_spec, const PhaseSpec& phase_spec,
                                BudgetKind budget) {
  const GridPtr& g = ground.u.grid;
  const int N = g->dim;
  const double h = model.h;
  const double alpha = model.alpha;
  const double beta = beta_of(alpha);

  AdmissibleDatum d;
  d.K = K;
  d.h = h;
  d.k = phase_spec.k;

  RealField v = ground.u;
  if (w_spec.target_h1 > 0.0) {
    Rng rng(w_spec.seed != 0 ? w_spec.seed : 1);
    v += random_h1_field(g, rng, w_spec.target_h1, w_spec.n_modes);
  }
  const double target_norm = model.sigma * std::pow(h, 0.5 * N * beta);
  const double nv = std::sqrt(l2_norm2(v));
  if (!(nv > 0.0)) throw std::runtime_error("make_admissible: profile vanished");
  v *= target_norm / nv;
  d.u = v;

  RealField w_eff = v;
  w_eff -= ground.u;
  const double w_h1 = h1_norm(w_eff);

  double kmag = vec_norm(d.k, N);

  d.psi0 = to_complex(v);
  const std::size_t n = g->n_interior();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 x = g->coord(i);
    double phase = 0.0;
    for (int a = 0; a < N; ++a) phase += d.k[a] * x[a];
    d.psi0.v[i] *= std::exp(cplx(0.0, phase));
  }

  double v_int = 0.0;
  if (model.v_family != VFamily::zero) {
    for (std::size_t i = 0; i < n; ++i) {
      const double ui = v.v[i];
      v_int += eval_V(model, g->coord(i), N) * ui * ui;
    }
    v_int *= g->cell_volume;
  }

  const double sig2 = model.sigma * model.sigma;
  auto add = [&](const std::string& name, double value, double bound, bool strict) {
    AdmissibleCheckLine c;
    c.name = name;
    c.value = value;
    c.bound = bound;
    c.strict = strict;
    c.pass = strict ? (value < bound) : (value <= bound);
    d.checks.push_back(c);
  };
  add("scaled charge matches sigma^2", std::abs(charge_h(d.psi0, h, alpha) - sig2),
      1e-10 * std::max(1.0, sig2), false);
  add("perturbation H1 budget", w_h1, K * std::pow(h, alpha), true);
  const double k_bound = budget == BudgetKind::bounded ? K * std::pow(h, 0.5 * N * beta) : K;
  add("phase gradient budget", kmag, k_bound, false);
  const double v_bound = budget == BudgetKind::bounded
                             ? K * std::pow(h, N * beta)
                             : K * std::pow(h, N * beta - 2.0 * alpha);
  add("potential energy budget", v_int, v_bound, false);

  d.admissible = true;
  for (const auto& c : d.checks) {
    if (!c.pass) {
      d.admissible = false;
      if (d.reject_reason.empty()) d.reject_reason = c.name;
    }
  }
  return d;
}

std::string AdmissibleDatum::certificate() const {
  std::ostringstream os;
  char buf[160];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "  [%s] %s: value = %.6g, bound %s %.6g\n",
                  c.pass ? "ok" : "VIOLATED", c.name.c_str(), c.value, c.strict ? "<" : "<=",
                  c.bound);
    os << buf;
  }
  return os.str();
}

// --------------------------------------------------------------------------
// Sweep serialization and helpers

std::string sweep_result_json(const SweepResult& r) {
  nlohmann::json j;
  j["kind"] = r.kind;
  j["params"] = r.params;
  j["points"] = nlohmann::json::array();
  for (const auto& p : r.points) {
    nlohmann::json jp;
    jp["param"] = p.param;
    jp["valid"] = p.valid;
    jp["note"] = p.note;
    jp["metrics"] = p.metrics;
    if (!p.profile.empty()) jp["profile"] = p.profile;
    j["points"].push_back(jp);
  }
  j["summary"] = r.summary;
  j["verdict"] = r.verdict;
  j["verdict_note"] = r.verdict_note;
  return j.dump(2) + "\n";
}

SweepResult sweep_result_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SweepResult r;
  r.kind = j.value("kind", std::string());
  if (j.contains("params")) r.params = j["params"].get<std::map<std::string, double>>();
  if (j.contains("summary")) r.summary = j["summary"].get<std::map<std::string, double>>();
  r.verdict = j.value("verdict", false);
  r.verdict_note = j.value("verdict_note", std::string());
  if (j.contains("points")) {
    for (const auto& jp : j["points"]) {
      SweepPoint p;
      p.param = jp.value("param", 0.0);
      p.valid = jp.value("valid", true);
      p.note = jp.value("note", std::string());
      if (jp.contains("metrics")) p.metrics = jp["metrics"].get<std::map<std::string, double>>();
      if (jp.contains("profile")) p.profile = jp["profile"].get<std::vector<double>>();
      r.points.push_back(std::move(p));
    }
  }
  return r;
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall_tau: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  long conc = 0, disc = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = (x[j] - x[i]) * (y[j] - y[i]);
      if (s > 0.0) ++conc;
      else if (s < 0.0) ++disc;
    }
  return double(conc - disc) / (0.5 * double(n) * double(n - 1));
}

void run_jobs(int n_jobs, std::vector<std::function<void()>>& tasks) {
  if (n_jobs <= 1 || tasks.size() <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  const int nw = int(std::min<std::size_t>(std::size_t(n_jobs), tasks.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(nw);
  std::vector<std::thread> workers;
  workers.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (;;) {
          const std::size_t k = next.fetch_add(1);
          if (k >= tasks.size()) break;
          tasks[k]();
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// --------------------------------------------------------------------------
// Orbital stability

double orbit_distance(const ComplexField& psi, const RealField& u, int n_phase_grid) {
  if (n_phase_grid < 1) throw std::invalid_argument("orbit_distance: empty phase grid");
  const ComplexField uc = to_complex(u);
  const double a = dirichlet_energy(psi) + l2_norm2(psi) + dirichlet_energy(u) + l2_norm2(u);
  const cplx z = dirichlet_grad_inner(psi, uc) + l2_inner(psi, uc);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n_phase_grid; ++j) {
    const double th = 2.0 * M_PI * double(j) / double(n_phase_grid);
    const double d2 = a - 2.0 * std::real(std::exp(cplx(0.0, th)) * z);
    best = std::min(best, d2);
  }
  return std::sqrt(std::max(0.0, best));
}

namespace {

struct MemberOut {
  double D = 0.0;
  double charge_drift = 0.0;
  double energy_drift = 0.0;
  bool completed = false;
  bool included = false;
  std::string fail;
};

MemberOut run_stability_member(const GridPtr& grid, const ModelSpec& model, const RealField& ustar,
                               const ComplexField& psi0, const StabilityOpts& opts,
                               const std::string& csv_path) {
  MemberOut out;
  try {
    Evolver ev(grid, model);
    std::ofstream csv;
    if (!csv_path.empty()) {
      csv.open(csv_path, std::ios::binary);
      if (!csv) throw std::runtime_error("cannot write " + csv_path);
      csv << diagnostics_csv_header(grid->dim) << "\n";
    }
    double dmax = 0.0;
    TrajectoryRecord rec =
        ev.evolve(psi0, opts.evolve, [&](const DiagnosticsSample& s, const ComplexField& psi) {
          dmax = std::max(dmax, orbit_distance(psi, ustar, opts.n_phase_grid));
          if (csv.is_open()) csv << diagnostics_csv_row(s, grid->dim) << "\n";
        });
    out.D = dmax;
    out.charge_drift = rec.charge_drift_rel;
    out.energy_drift = rec.energy_drift_rel;
    out.completed = rec.completed;
    if (!rec.completed) out.fail = rec.failure;
    out.included = rec.completed && rec.charge_drift_rel <= opts.gate_charge &&
                   rec.energy_drift_rel <= opts.gate_energy;
    if (!out.included && out.fail.empty()) out.fail = "conservation drift beyond gates";
  } catch (const std::exception& e) {
    out.completed = false;
    out.included = false;
    out.fail = e.what();
  }
  return out;
}

}  // namespace

SweepResult orbital_stability_run(const GridPtr& grid, const ModelSpec& model, double sigma,
                                  const StabilityOpts& opts) {
  SweepResult r;
  r.kind = "orbital_stability";
  r.params["sigma"] = sigma;
  r.params["T"] = opts.evolve.T;
  r.params["dt"] = opts.evolve.dt;
  r.params["ensemble"] = opts.ensemble;
  r.params["n_phase_grid"] = opts.n_phase_grid;
  r.params["C_bound"] = opts.C_bound;
  r.params["seed"] = double(opts.seed);

  GroundState gs = minimize_on_sphere(grid, model, sigma, opts.min_opts);
  r.summary["gs_converged"] = gs.converged ? 1.0 : 0.0;
  r.summary["gs_residual"] = gs.residual;
  r.summary["gs_lambda"] = gs.lambda;
  if (!gs.converged) {
    r.verdict = false;
    r.verdict_note = "ground state did not converge";
    return r;
  }
  const double unorm = h1_norm(gs.u);
  r.summary["u_h1"] = unorm;

  // Unperturbed run: the integrator floor of the orbit distance.
  MemberOut floor_run = run_stability_member(
      grid, model, gs.u, to_complex(gs.u), opts,
      opts.traj_dir.empty() ? std::string() : opts.traj_dir + "/traj_floor.csv");
  if (!floor_run.completed) {
    r.verdict = false;
    r.verdict_note = "floor run failed: " + floor_run.fail;
    return r;
  }
  const double floor_d = floor_run.D;
  r.summary["floor_D"] = floor_d;

  const int nd = int(opts.deltas_rel.size());
  std::vector<MemberOut> outs(std::size_t(nd) * opts.ensemble);
  std::vector<std::function<void()>> tasks;
  for (int di = 0; di < nd; ++di) {
    const double delta_abs = opts.deltas_rel[di] * unorm;
    for (int e = 0; e < opts.ensemble; ++e) {
      const std::size_t slot = std::size_t(di) * opts.ensemble + e;
      tasks.push_back([&, di, e, slot, delta_abs] {
        Rng rng(mix_seed(opts.seed, 1 + std::uint64_t(di) * 1000 + std::uint64_t(e)));
        RealField wr = random_h1_field(grid, rng, 1.0);
        RealField wi = random_h1_field(grid, rng, 1.0);
        ComplexField w = to_complex(wr);
        for (std::size_t i = 0; i < w.v.size(); ++i) w.v[i] += cplx(0.0, wi.v[i]);
        const double wn = h1_norm(w);
        ComplexField psi0 = to_complex(gs.u);
        const double scale = delta_abs / wn;
        for (std::size_t i = 0; i < psi0.v.size(); ++i) psi0.v[i] += scale * w.v[i];
        std::string path;
        if (!opts.traj_dir.empty())
          path = opts.traj_dir + "/traj_delta" + std::to_string(di) + "_m" + std::to_string(e) +
                 ".csv";
        outs[slot] = run_stability_member(grid, model, gs.u, psi0, opts, path);
      });
    }
  }
  run_jobs(opts.jobs, tasks);

  for (int di = 0; di < nd; ++di) {
    SweepPoint p;
    const double delta_abs = opts.deltas_rel[di] * unorm;
    p.param = delta_abs;
    auto& M = p.metrics;
    M["delta_rel"] = opts.deltas_rel[di];
    M["delta_abs"] = delta_abs;
    double dmax = 0.0, dsum = 0.0;
    int inc = 0;
    for (int e = 0; e < opts.ensemble; ++e) {
      const MemberOut& o = outs[std::size_t(di) * opts.ensemble + e];
      M["D_" + std::to_string(e)] = o.D;
      M["included_" + std::to_string(e)] = o.included ? 1.0 : 0.0;
      if (o.included) {
        ++inc;
        dmax = std::max(dmax, o.D);
        dsum += o.D;
      } else if (p.note.empty()) {
        p.note = "member " + std::to_string(e) + " excluded: " + o.fail;
      }
    }
    M["n_included"] = inc;
    M["D_max"] = dmax;
    M["D_mean"] = inc > 0 ? dsum / inc : 0.0;
    p.valid = inc > 0;
    if (!p.valid && p.note.empty()) p.note = "all ensemble members excluded";
    r.points.push_back(std::move(p));
  }

  StabilityVerdict v = stability_verdict(r.points, floor_d, opts.C_bound);
  r.summary["tau_delta"] = v.tau_delta;
  r.summary["tau_list_order"] = -v.tau_delta;
  r.summary["D_smallest"] = v.D_smallest;
  r.summary["bound_smallest"] = v.bound_smallest;
  r.verdict = v.ok;
  r.verdict_note = v.note;
  return r;
}

StabilityVerdict stability_verdict(const std::vector<SweepPoint>& points, double floor_d,
                                   double C_bound) {
  StabilityVerdict v;
  v.floor_d = floor_d;
  std::vector<double> ds, Ds;
  for (const auto& p : points) {
    if (!p.valid) continue;
    ds.push_back(p.metrics.at("delta_abs"));
    Ds.push_back(p.metrics.at("D_max"));
  }
  if (ds.size() < 2) {
    v.note = "fewer than two valid perturbation sizes";
    return v;
  }
  v.tau_delta = kendall_tau(ds, Ds);
  v.monotone_ok = v.tau_delta == 1.0;
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < ds.size(); ++i)
    if (ds[i] < ds[smallest]) smallest = i;
  v.D_smallest = Ds[smallest];
  v.bound_smallest = C_bound * ds[smallest] + floor_d;
  v.bound_ok = v.D_smallest <= v.bound_smallest;
  v.ok = v.monotone_ok && v.bound_ok;
  std::ostringstream os;
  os << "tau(delta, D) = " << v.tau_delta << (v.monotone_ok ? " (monotone)" : " (NOT monotone)")
     << "; D(smallest) = " << v.D_smallest << (v.bound_ok ? " <= " : " > ") << v.bound_smallest;
  v.note = os.str();
  return v;
}

// --------------------------------------------------------------------------
// Localization sweeps

namespace {

enum class LocMetric { mass, gradient };

/// Outside metric at scaled radius R (ball radius R * h^beta around c).
double loc_metric(LocMetric kind, const ComplexField& psi, const RealField& umod, const Vec3& c,
                  double R, double hbeta, double h, double alpha, double sigma) {
  if (kind == LocMetric::mass)
    return mass_outside_ball(psi, c, R * hbeta, h, alpha) / (sigma * sigma);
  return grad_ratio_outside_ball(umod, c, R * hbeta);
}

/// Accumulate the sup-over-time profile: outside metric at every radius of the
/// grid radii_scaled (ascending), computed in one radial pass.
void accumulate_profile(std::vector<double>& prof, const std::vector<double>& radii_scaled,
                        const std::vector<double>& weight, const GridPtr& g, const Vec3& c,
                        double hbeta, double denom) {
  const std::size_t nr = radii_scaled.size();
  std::vector<double> bucket(nr + 1, 0.0);
  const std::size_t n = g->n_interior();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 x = g->coord(i);
    double r2 = 0.0;
    for (int a = 0; a < g->dim; ++a) {
      const double d = x[a] - c[a];
      r2 += d * d;
    }
    const double rs = std::sqrt(r2) / hbeta;
    const std::size_t idx =
        std::upper_bound(radii_scaled.begin(), radii_scaled.end(), rs) - radii_scaled.begin();
    bucket[idx] += weight[i];
  }
  double suffix = 0.0;
  for (std::size_t j = nr; j-- > 0;) {
    suffix += bucket[j + 1];
    prof[j] = std::max(prof[j], suffix / denom);
  }
}

SweepPoint run_localization_point(const GridPtr& grid, const ModelSpec& model0,
                                  const LocalizationOpts& opts, LocMetric metric,
                                  SweepSetting setting, int idx) {
  SweepPoint P;
  const double h = opts.h_list[idx];
  P.param = h;
  auto& M = P.metrics;
  M["h"] = h;
  try {
    ModelSpec m = model0;
    m.h = h;
    m.finalize();
    const int N = grid->dim;
    const double beta = beta_of(m.alpha);
    const double hbeta = std::pow(h, beta);
    const double sig_eff = m.sigma * std::pow(h, 0.5 * N * beta);
    M["h_beta"] = hbeta;

    MinimizeOpts mo = opts.min_opts;
    mo.kappa = h * h;
    mo.w_scale = std::pow(h, -m.alpha);
    mo.seed = mix_seed(opts.seed, 100 + std::uint64_t(idx));
    GroundState gs = minimize_on_sphere(grid, m, sig_eff, mo);
    M["gs_converged"] = gs.converged ? 1.0 : 0.0;
    M["gs_residual"] = gs.residual;
    M["lambda"] = gs.lambda;
    M["m_h"] = gs.J_min * std::pow(h, -double(N) * beta);
    if (!gs.converged) {
      P.valid = false;
      P.note = "scaled ground state did not converge";
      return P;
    }

    PerturbSpec ws;
    ws.target_h1 = opts.w_h1_rel * opts.K * std::pow(h, m.alpha);
    ws.seed = mix_seed(opts.seed, 200 + std::uint64_t(idx));
    PhaseSpec ph;
    const double dirn = vec_norm(opts.kick_dir, N);
    if (dirn > 0.0) {
      const double kmag = opts.kick_scale * hbeta;
      for (int a = 0; a < N; ++a) ph.k[a] = kmag * opts.kick_dir[a] / dirn;
    }
    AdmissibleDatum datum = make_admissible(
        gs, m, opts.K, ws, ph,
        setting == SweepSetting::large_box ? BudgetKind::whole_space : BudgetKind::bounded);
    M["admissible"] = datum.admissible ? 1.0 : 0.0;
    // Budget margins, in check order: charge gap, w, phase, potential.
    M["w_h1"] = datum.checks[1].value;
    M["w_bound"] = datum.checks[1].bound;
    M["k_mag"] = datum.checks[2].value;
    M["k_bound"] = datum.checks[2].bound;
    M["V_int"] = datum.checks[3].value;
    M["V_bound"] = datum.checks[3].bound;
    if (!datum.admissible) {
      P.valid = false;
      P.note = "datum rejected: " + datum.reject_reason;
      return P;
    }

    const Vec3 c0 = barycenter(datum.psi0);
    const double cap = grid->domain.distance_to_boundary(c0) / hbeta;
    M["R_cap"] = cap;
    if (!(cap > 0.0)) {
      P.valid = false;
      P.note = "barycenter outside the domain";
      return P;
    }
    RealField u0 = modulus(datum.psi0);
    auto metric0 = [&](double R) {
      return loc_metric(metric, datum.psi0, u0, c0, R, hbeta, h, m.alpha, m.sigma);
    };
    if (metric0(cap) > 0.5 * opts.eps) {
      P.valid = false;
      P.note = "no radius below the boundary cap reaches eps/2 at t = 0";
      return P;
    }
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (metric0(mid) <= 0.5 * opts.eps) hi = mid;
      else lo = mid;
    }
    const double R_fit = hi;
    M["R_fit"] = R_fit;
    M["metric_t0"] = metric0(R_fit);

    std::vector<double> radii(std::size_t(opts.n_radius_grid));
    for (int j = 0; j < opts.n_radius_grid; ++j)
      radii[std::size_t(j)] = cap * double(j + 1) / double(opts.n_radius_grid);
    P.profile.assign(radii.size(), 0.0);

    EvolveOpts eo = opts.evolve;
    eo.T = opts.T;
    eo.have_ball = true;
    eo.ball_center = c0;
    eo.ball_radius = R_fit * hbeta;
    eo.refit_ball_center = metric == LocMetric::gradient;

    Evolver ev(grid, m);
    std::ofstream csv;
    if (!opts.traj_dir.empty()) {
      const std::string path = opts.traj_dir + "/traj_h" + std::to_string(idx) + ".csv";
      csv.open(path, std::ios::binary);
      if (!csv) throw std::runtime_error("cannot write " + path);
      csv << diagnostics_csv_header(grid->dim) << "\n";
    }
    double sup_metric = 0.0, q_exc = 0.0, c_exc = 0.0;
    Vec3 c_prev = c0;
    std::vector<double> weight(grid->n_interior());
    TrajectoryRecord rec =
        ev.evolve(datum.psi0, eo, [&](const DiagnosticsSample& s, const ComplexField& psi) {
          if (csv.is_open()) csv << diagnostics_csv_row(s, grid->dim) << "\n";
          RealField umod = modulus(psi);
          Vec3 c = c0;
          if (metric == LocMetric::gradient && s.t > 0.0) {
            c = fit_ball_center(umod, R_fit * hbeta, c_prev);
            c_prev = c;
          }
          sup_metric = std::max(sup_metric, loc_metric(metric, psi, umod, c, R_fit, hbeta, h,
                                                       m.alpha, m.sigma));
          double denom;
          if (metric == LocMetric::mass) {
            for (std::size_t i = 0; i < weight.size(); ++i) weight[i] = std::norm(psi.v[i]);
            denom = std::pow(h, double(grid->dim) * beta) * m.sigma * m.sigma /
                    grid->cell_volume;
          } else {
            auto gr = gradient(umod);
            double tot = 0.0;
            for (std::size_t i = 0; i < weight.size(); ++i) {
              double s2 = 0.0;
              for (int a = 0; a < grid->dim; ++a) s2 += gr[a].v[i] * gr[a].v[i];
              weight[i] = s2;
              tot += s2;
            }
            denom = tot > 0.0 ? tot : 1.0;
          }
          accumulate_profile(P.profile, radii, weight, grid, c, hbeta, denom);
          q_exc = std::max(q_exc, vec_norm(vec_sub(s.q, c0), grid->dim));
          c_exc = std::max(c_exc, vec_norm(vec_sub(c, c0), grid->dim));
        });

    M["sup_metric"] = sup_metric;
    M["pass"] = sup_metric < opts.eps ? 1.0 : 0.0;
    M["charge_drift"] = rec.charge_drift_rel;
    M["energy_drift"] = rec.energy_drift_rel;
    M["boundary_mass_max"] = rec.boundary_mass_max;
    M["fp_iters_max"] = rec.fp_iters_max;
    M["q_excursion"] = q_exc;
    M["center_excursion"] = c_exc;
    if (setting == SweepSetting::large_box) {
      double hw = std::numeric_limits<double>::infinity();
      for (int a = 0; a < grid->dim; ++a) hw = std::min(hw, grid->domain.half_widths[a]);
      M["halfwidth_min"] = hw;
      M["box_over_ball"] = hw / (hbeta * R_fit);
    }
    if (!rec.completed) {
      P.valid = false;
      P.note = "evolution failed: " + rec.failure;
    }
  } catch (const std::exception& e) {
    P.valid = false;
    P.note = e.what();
  }
  return P;
}

SweepResult run_localization_sweep(const GridPtr& grid, const ModelSpec& model,
                                   const LocalizationOpts& opts, LocMetric metric,
                                   SweepSetting setting) {
  for (std::size_t i = 1; i < opts.h_list.size(); ++i)
    if (!(opts.h_list[i] < opts.h_list[i - 1]))
      throw std::invalid_argument("localization sweep: h_list must be strictly decreasing");

  SweepResult r;
  r.kind = metric == LocMetric::mass ? "localization_l2" : "localization_h1";
  r.params["K"] = opts.K;
  r.params["eps"] = opts.eps;
  r.params["T"] = opts.T;
  r.params["dt"] = opts.evolve.dt;
  r.params["kick_scale"] = opts.kick_scale;
  r.params["seed"] = double(opts.seed);
  r.params["spread_tol"] = opts.spread_tol;
  r.params["large_box"] = setting == SweepSetting::large_box ? 1.0 : 0.0;

  r.points.resize(opts.h_list.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < opts.h_list.size(); ++i)
    tasks.push_back([&, i] {
      r.points[i] = run_localization_point(grid, model, opts, metric, setting, int(i));
    });
  run_jobs(opts.jobs, tasks);

  LocalizationVerdict v = localization_verdict(r.points, opts.eps, opts.spread_tol);
  r.summary["h0"] = v.h0;
  r.summary["R_hat"] = v.R_hat;
  r.summary["spread"] = v.spread;
  r.summary["common_ok"] = v.common_ok ? 1.0 : 0.0;
  r.summary["n_pass"] = v.n_pass;
  r.verdict = v.ok;
  r.verdict_note = v.note;

  if (setting == SweepSetting::large_box) {
    bool box_ok = true, bnd_ok = true;
    for (const auto& p : r.points) {
      if (!p.valid || p.metrics.at("pass") != 1.0) continue;
      const double hbeta = p.metrics.at("h_beta");
      if (p.metrics.at("halfwidth_min") < opts.box_factor * hbeta * v.R_hat) box_ok = false;
      if (p.metrics.at("boundary_mass_max") >= opts.gate_boundary) bnd_ok = false;
    }
    r.summary["box_ok"] = box_ok ? 1.0 : 0.0;
    r.summary["boundary_ok"] = bnd_ok ? 1.0 : 0.0;
    if (!box_ok) {
      r.verdict = false;
      r.verdict_note += "; box half-width below the required multiple of h^beta R";
    }
    if (!bnd_ok) {
      r.verdict = false;
      r.verdict_note += "; boundary mass above the monitor gate";
    }
  }
  return r;
}

}  // namespace

SweepResult l2_localization_sweep(const GridPtr& grid, const ModelSpec& model,
                                  const LocalizationOpts& opts) {
  return run_localization_sweep(grid, model, opts, LocMetric::mass, SweepSetting::bounded);
}

SweepResult h1_localization_sweep(const GridPtr& grid, const ModelSpec& model,
                                  const LocalizationOpts& opts, SweepSetting setting) {
  return run_localization_sweep(grid, model, opts, LocMetric::gradient, setting);
}

double point_metric_at_radius(const SweepPoint& p, double R) {
  const auto it = p.metrics.find("R_cap");
  if (it == p.metrics.end() || p.profile.empty()) return std::numeric_limits<double>::infinity();
  const double cap = it->second;
  const int n = int(p.profile.size());
  if (R > cap) return std::numeric_limits<double>::infinity();
  const int j = int(std::floor(R * double(n) / cap - 1.0 + 1e-12));
  if (j < 0) return std::numeric_limits<double>::infinity();
  return p.profile[std::size_t(std::min(j, n - 1))];
}

LocalizationVerdict localization_verdict(const std::vector<SweepPoint>& points, double eps,
                                         double spread_tol) {
  LocalizationVerdict v;
  const int n = int(points.size());
  int start = n;
  for (int i = n - 1; i >= 0; --i) {
    const auto& p = points[std::size_t(i)];
    const bool pass = p.valid && p.metrics.count("pass") && p.metrics.at("pass") == 1.0;
    if (!pass) break;
    start = i;
  }
  if (start == n) {
    v.note = "no trailing run of passing h values";
    return v;
  }
  v.n_pass = n - start;
  v.h0 = points[std::size_t(start)].param;
  double rmax = 0.0, rmin = std::numeric_limits<double>::infinity(), rsum = 0.0;
  for (int i = start; i < n; ++i) {
    const double rf = points[std::size_t(i)].metrics.at("R_fit");
    rmax = std::max(rmax, rf);
    rmin = std::min(rmin, rf);
    rsum += rf;
  }
  v.R_hat = rmax;
  const double rmean = rsum / v.n_pass;
  v.spread = rmean > 0.0 ? (rmax - rmin) / rmean : 0.0;
  v.spread_ok = v.spread < spread_tol;
  v.common_ok = true;
  for (int i = start; i < n; ++i)
    if (!(point_metric_at_radius(points[std::size_t(i)], v.R_hat) < eps)) v.common_ok = false;
  v.ok = v.common_ok && v.spread_ok;
  std::ostringstream os;
  os << "h0 = " << v.h0 << ", R = " << v.R_hat << ", fitted-R spread = " << v.spread
     << (v.spread_ok ? "" : " (over tolerance)") << ", common radius "
     << (v.common_ok ? "holds" : "FAILS") << " for " << v.n_pass << " h value(s)";
  v.note = os.str();
  return v;
}

// --------------------------------------------------------------------------
// Barycenter confinement

ConfinementReport barycenter_confinement(const TrajectoryRecord& traj, const Vec3& q_hat,
                                         double eps, double h, double alpha, double R,
                                         const DomainSpec& domain) {
  ConfinementReport rep;
  rep.bound = domain.diameter() * eps + std::pow(h, beta_of(alpha)) * R;
  for (const auto& s : traj.samples) {
    const double exc = vec_norm(vec_sub(s.q, q_hat), domain.dim);
    rep.max_excursion = std::max(rep.max_excursion, exc);
    if (!(exc < rep.bound)) ++rep.n_violations;
  }
  rep.worst_margin = rep.bound - rep.max_excursion;
  rep.ok = rep.n_violations == 0;
  return rep;
}

// --------------------------------------------------------------------------
// Barycenter force law

NewtonReport newton_law_check(const TrajectoryRecord& traj, const ModelSpec& model, int dim) {
  NewtonReport rep;
  const auto& S = traj.samples;
  if (S.size() < 5) {
    rep.note = "need at least five samples for the five-point stencils";
    return rep;
  }
  const double dts = S[1].t - S[0].t;
  for (std::size_t i = 0; i + 1 < S.size(); ++i)
    if (std::abs(S[i + 1].t - S[i].t - dts) > 1e-9 * std::max(1.0, dts)) {
      rep.note = "samples are not uniformly spaced";
      return rep;
    }
  rep.dt_samples = dts;
  const double h = model.h;
  const double qfac = std::pow(h, double(dim) * beta_of(model.alpha));  // plain / scaled charge

  for (std::size_t i = 2; i + 2 < S.size(); ++i) {
    const double Q = S[i].charge * qfac;
    for (int a = 0; a < dim; ++a) {
      auto X = [&](std::size_t j) { return S[j].q[a] * S[j].charge * qfac; };
      const double dX =
          (X(i - 2) - 8.0 * X(i - 1) + 8.0 * X(i + 1) - X(i + 2)) / (12.0 * dts);
      rep.momentum_gap_max =
          std::max(rep.momentum_gap_max, std::abs(dX - h * S[i].p[a]) / Q);
      const double qdd = (-S[i - 2].q[a] + 16.0 * S[i - 1].q[a] - 30.0 * S[i].q[a] +
                          16.0 * S[i + 1].q[a] - S[i + 2].q[a]) /
                         (12.0 * dts * dts);
      const double fv = S[i].Fv[a] / Q;
      const double fb = h * h * S[i].Fb[a] / Q;
      rep.newton_gap_max = std::max(rep.newton_gap_max, std::abs(qdd - (fv + fb)));
      rep.force_V_max = std::max(rep.force_V_max, std::abs(fv));
      rep.force_b_max = std::max(rep.force_b_max, std::abs(fb));
    }
    ++rep.n_checked;
  }
  rep.ok = true;
  return rep;
}

NewtonOrderStudy newton_order_study(const DomainSpec& domain, int nodes_coarse,
                                    const ModelSpec& model, double sigma, double kick,
                                    const MinimizeOpts& min_opts, const EvolveOpts& evolve) {
  auto run_level = [&](int nodes, int refine) -> NewtonReport {
    GridPtr g = build_grid(domain, nodes);
    GroundState gs = minimize_on_sphere(g, model, sigma, min_opts);
    if (!gs.converged)
      throw std::runtime_error("newton_order_study: ground state did not converge");
    ComplexField psi0 = to_complex(gs.u);
    for (std::size_t i = 0; i < psi0.v.size(); ++i)
      psi0.v[i] *= std::exp(cplx(0.0, kick * g->coord(i)[0]));
    EvolveOpts eo = evolve;
    eo.dt = evolve.dt / refine;
    // sample_every is kept as configured, so the sample spacing halves along
    // with dt and the trajectory-stencil error contracts with the rest.
    Evolver ev(g, model);
    TrajectoryRecord rec = ev.evolve(psi0, eo);
    if (!rec.completed)
      throw std::runtime_error("newton_order_study: evolution failed: " + rec.failure);
    return newton_law_check(rec, model, domain.dim);
  };
  NewtonOrderStudy study;
  study.coarse = run_level(nodes_coarse, 1);
  study.fine = run_level(2 * nodes_coarse - 1, 2);
  if (study.fine.momentum_gap_max > 0.0)
    study.order_momentum = std::log2(study.coarse.momentum_gap_max / study.fine.momentum_gap_max);
  if (study.fine.newton_gap_max > 0.0)
    study.order_newton = std::log2(study.coarse.newton_gap_max / study.fine.newton_gap_max);
  return study;
}

}  // namespace nlse
