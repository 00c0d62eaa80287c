// nlselab: a command-line laboratory for a nonlinear Schrodinger equation on
// bounded domains with zero boundary data.  Subcommands cover configuration
// validation, constrained ground states, conservative time evolution, orbital
// stability ensembles, small-h localization sweeps and the barycenter force
// law.  Every run writes a verdict JSON and a manifest with content digests;
// identical configurations and seeds reproduce outputs byte for byte.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlse/config.hpp"
#include "nlse/experiments.hpp"
#include "nlse/grid.hpp"
#include "nlse/io.hpp"
#include "nlse/manifest.hpp"
#include "nlse/rng.hpp"

namespace fs = std::filesystem;
using namespace nlse;
using nlohmann::json;

namespace {

struct Gate {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct RunContext {
  std::string sub;
  std::string command;
  RunConfig cfg;
  std::string out_dir;
  std::vector<Gate> gates;
  std::vector<std::string> notes;
  json report = json::object();

  void gate(const std::string& name, double value, double bound, bool pass) {
    gates.push_back({name, value, bound, pass});
  }
  bool ok() const {
    for (const auto& g : gates)
      if (!g.pass) return false;
    return true;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int finish(RunContext& ctx, std::chrono::steady_clock::time_point start) {
  json v;
  v["subcommand"] = ctx.sub;
  v["ok"] = ctx.ok();
  v["gates"] = json::array();
  for (const auto& g : ctx.gates)
    v["gates"].push_back(
        {{"name", g.name}, {"value", g.value}, {"bound", g.bound}, {"pass", g.pass}});
  v["notes"] = ctx.notes;
  v["report"] = ctx.report;
  write_text(ctx.out_dir + "/verdict.json", v.dump(2) + "\n");

  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(ctx.out_dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end());

  RunManifest m;
  m.command = ctx.command;
  m.config_resolved = ctx.cfg.resolved_json();
  m.seed = ctx.cfg.seed;
  m.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(ctx.out_dir, m, files);

  for (const auto& g : ctx.gates)
    std::cout << (g.pass ? "[PASS] " : "[FAIL] ") << ctx.sub << ": " << g.name
              << " (value = " << g.value << ", bound = " << g.bound << ")\n";
  if (!ctx.ok())
    for (const auto& g : ctx.gates)
      if (!g.pass) {
        std::cout << "first failed gate: " << g.name << "\n";
        break;
      }
  return ctx.ok() ? 0 : 1;
}

/// Ground state of the (possibly h-scaled) constrained problem; at h = 1 the
/// scaling factors reduce to 1 and this is the plain reduced problem.
struct GsRun {
  GroundState gs;
  double sigma_eff = 0.0;
  MinimizeOpts mo;
};

GsRun solve_ground(const RunConfig& c, const GridPtr& g, const ModelSpec& m) {
  GsRun r;
  r.mo = c.minimize_opts();
  r.mo.kappa = m.h * m.h;
  r.mo.w_scale = std::pow(m.h, -m.alpha);
  r.sigma_eff = m.sigma * std::pow(m.h, 0.5 * g->dim * beta_of(m.alpha));
  r.gs = minimize_on_sphere(g, m, r.sigma_eff, r.mo);
  return r;
}

ComplexField build_initial(const RunConfig& c, const GridPtr& g, const ModelSpec& m,
                           GsRun& ground) {
  ground = solve_ground(c, g, m);
  if (!ground.gs.converged)
    throw std::runtime_error("initial datum: ground state did not converge (residual " +
                             fmt_g17(ground.gs.residual) + ")");
  ComplexField psi = to_complex(ground.gs.u);
  if (c.initial == "kicked") {
    for (std::size_t i = 0; i < psi.v.size(); ++i)
      psi.v[i] *= std::exp(cplx(0.0, c.kick * g->coord(i)[0]));
  } else if (c.initial == "perturbed") {
    Rng rng(mix_seed(c.seed, 7));
    RealField wr = random_h1_field(g, rng, 1.0);
    RealField wi = random_h1_field(g, rng, 1.0);
    ComplexField w = to_complex(wr);
    for (std::size_t i = 0; i < w.v.size(); ++i) w.v[i] += cplx(0.0, wi.v[i]);
    const double scale = c.perturb * h1_norm(ground.gs.u) / h1_norm(w);
    for (std::size_t i = 0; i < psi.v.size(); ++i) psi.v[i] += scale * w.v[i];
  }
  return psi;
}

// ------------------------------------------------------------ subcommands

int cmd_validate(RunContext& ctx, std::chrono::steady_clock::time_point start) {
  const RunConfig& c = ctx.cfg;
  DomainSpec dom = c.domain();
  GridPtr g = build_grid(dom, c.nodes_per_axis);
  ModelSpec m = c.model();
  ConditionReport rep = validate_conditions(m, g->dim);

  ctx.report["domain"] = dom.describe();
  ctx.report["interior_nodes"] = g->n_interior();
  ctx.report["dx"] = g->dx[0];
  ctx.report["box_like"] = g->box_like;
  ctx.report["conditions"] = json::array();
  for (const auto& ck : rep.checks) {
    ctx.report["conditions"].push_back(
        {{"name", ck.name}, {"pass", ck.pass}, {"detail", ck.detail}});
    if (ck.required_for_core) ctx.gate("condition: " + ck.name, ck.pass ? 1.0 : 0.0, 1.0, ck.pass);
    else if (!ck.pass)
      ctx.notes.push_back("localization-only condition not met: " + ck.name);
  }
  ctx.notes.push_back(rep.summary());
  std::cout << rep.summary() << "\n";
  return finish(ctx, start);
}

int cmd_ground_state(RunContext& ctx, std::chrono::steady_clock::time_point start) {
  const RunConfig& c = ctx.cfg;
  GridPtr g = build_grid(c.domain(), c.nodes_per_axis);
  ModelSpec m = c.model();
  GsRun r = solve_ground(c, g, m);

  write_field_csv(ctx.out_dir + "/u.csv", r.gs.u);
  write_field_bin(ctx.out_dir + "/u.bin", r.gs.u);
  json s;
  s["sigma"] = m.sigma;
  s["sigma_eff"] = r.sigma_eff;
  s["h"] = m.h;
  s["alpha"] = m.alpha;
  s["lambda"] = r.gs.lambda;
  s["m_value"] = r.gs.J_min;
  s["m_scaled"] = r.gs.J_min * std::pow(m.h, -double(g->dim) * beta_of(m.alpha));
  s["residual"] = r.gs.residual;
  s["iterations"] = r.gs.iterations;
  s["converged"] = r.gs.converged;
  s["n_converged_starts"] = r.gs.n_converged;
  s["start_spread"] = r.gs.start_spread;
  s["dispersal_suspect"] = r.gs.dispersal_suspect;
  s["seed"] = c.seed;
  write_text(ctx.out_dir + "/ground_state.json", s.dump(2) + "\n");
  ctx.report = s;

  const double res_bound = c.tol_res * h1_norm(r.gs.u);
  ctx.gate("flow converged", r.gs.converged ? 1.0 : 0.0, 1.0, r.gs.converged);
  ctx.gate("residual within tolerance", r.gs.residual, res_bound, r.gs.residual <= res_bound);
  if (r.gs.dispersal_suspect)
    ctx.notes.push_back("iterates flatten toward zero action: sigma may sit below the "
                        "existence threshold for this nonlinearity");
  return finish(ctx, start);
}

int cmd_evolve(RunContext& ctx, std::chrono::steady_clock::time_point start) {
  const RunConfig& c = ctx.cfg;
  GridPtr g = build_grid(c.domain(), c.nodes_per_axis);
  ModelSpec m = c.model();
  GsRun ground;
  ComplexField psi0 = build_initial(c, g, m, ground);

  std::ofstream csv(ctx.out_dir + "/trajectory.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write trajectory.csv");
  csv << diagnostics_csv_header(g->dim) << "\n";

  Evolver ev(g, m);
  EvolveOpts eo = c.evolve_opts();
  TrajectoryRecord rec =
      ev.evolve(psi0, eo, [&](const DiagnosticsSample& s, const ComplexField&) {
        csv << diagnostics_csv_row(s, g->dim) << "\n";
      });
  csv.close();

  int snap_idx = 0;
  json snaps = json::array();
  for (const auto& [t, field] : rec.snapshots) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%03d.bin", snap_idx);
    write_field_bin(ctx.out_dir + "/" + name, field);
    snaps.push_back({{"file", name}, {"t", t}});
    ++snap_idx;
  }

  ctx.report["completed"] = rec.completed;
  ctx.report["failure"] = rec.failure;
  ctx.report["steps"] = rec.steps;
  ctx.report["charge_drift_rel"] = rec.charge_drift_rel;
  ctx.report["energy_drift_rel"] = rec.energy_drift_rel;
  ctx.report["boundary_mass_max"] = rec.boundary_mass_max;
  ctx.report["fp_iters_max"] = rec.fp_iters_max;
  ctx.report["fp_iters_total"] = rec.fp_iters_total;
  ctx.report["snapshots"] = snaps;
  ctx.report["lambda"] = ground.gs.lambda;

  ctx.gate("run completed", rec.completed ? 1.0 : 0.0, 1.0, rec.completed);
  ctx.gate("relative charge drift", rec.charge_drift_rel, c.gate_charge,
           rec.charge_drift_rel <= c.gate_charge);
  ctx.gate("relative energy drift", rec.energy_drift_rel, c.gate_energy,
           rec.energy_drift_rel <= c.gate_energy);
  return finish(ctx, start);
}

int cmd_stability(RunContext& ctx, std::chrono::steady_clock::time_point start) {
  const RunConfig& c = ctx.cfg;
  GridPtr g = build_grid(c.domain(), c.nodes_per_axis);
  ModelSpec m = c.model();

  StabilityOpts o;
  o.deltas_rel = c.deltas;
  o.ensemble = c.ensemble;
  o.n_phase_grid = c.n_phase_grid;
  o.seed = c.seed;
  o.evolve = c.evolve_opts();
  o.evolve.T = c.T_exp;
  o.min_opts = c.minimize_opts();
  o.C_bound = c.C_bound;
  o.jobs = c.jobs;
  o.traj_dir = ctx.out_dir;

  SweepResult r = orbital_stability_run(g, m, m.sigma, o);
  write_text(ctx.out_dir + "/stability.json", sweep_result_json(r));
  ctx.report = json::parse(sweep_result_json(r));
  ctx.gate("stability verdict", r.verdict ? 1.0 : 0.0, 1.0, r.verdict);
  ctx.notes.push_back(r.verdict_note);
  return finish(ctx, start);
}

int cmd_sweep(RunContext& ctx, std::chrono::steady_clock::time_point start, bool h1) {
  const RunConfig& c = ctx.cfg;
  GridPtr g = build_grid(c.domain(), c.nodes_per_axis);
  ModelSpec m = c.model();

  LocalizationOpts o;
  o.h_list = c.h_list;
  o.K = c.K;
  o.eps = c.eps;
  o.T = c.T_exp;
  o.kick_scale = c.kick_scale;
  o.w_h1_rel = c.w_h1_rel;
  o.seed = c.seed;
  o.evolve = c.evolve_opts();
  o.min_opts = c.minimize_opts();
  o.spread_tol = c.spread_tol;
  o.box_factor = c.box_factor;
  o.jobs = c.jobs;
  o.traj_dir = ctx.out_dir;

  SweepResult r;
  std::string file;
  if (h1) {
    const SweepSetting setting =
        c.setting == "large_box" ? SweepSetting::large_box : SweepSetting::bounded;
    r = h1_localization_sweep(g, m, o, setting);
    file = "sweep_h1.json";
  } else {
    r = l2_localization_sweep(g, m, o);
    file = "sweep_l2.json";
  }
  write_text(ctx.out_dir + "/" + file, sweep_result_json(r));
  ctx.report = json::parse(sweep_result_json(r));
  ctx.gate("sweep verdict", r.verdict ? 1.0 : 0.0, 1.0, r.verdict);
  ctx.notes.push_back(r.verdict_note);
  return finish(ctx, start);
}

int cmd_newton(RunContext& ctx, std::chrono::steady_clock::time_point start) {
  const RunConfig& c = ctx.cfg;
  DomainSpec dom = c.domain();
  ModelSpec m = c.model();

  // Kicked datum in the configured potential: gap sizes and their decay
  // under simultaneous dt and dx halving.
  NewtonOrderStudy study = newton_order_study(dom, c.nodes_per_axis, m, m.sigma, c.newton_kick,
                                              c.minimize_opts(), c.evolve_opts());
  // Stationary centered control without potential: both force terms vanish.
  ModelSpec m0 = m;
  m0.v_family = VFamily::zero;
  m0.finalize();
  GridPtr g = build_grid(dom, c.nodes_per_axis);
  MinimizeOpts mo = c.minimize_opts();
  GroundState gs0 = minimize_on_sphere(g, m0, m0.sigma, mo);
  NewtonReport stat;
  if (gs0.converged) {
    Evolver ev(g, m0);
    EvolveOpts eo = c.evolve_opts();
    TrajectoryRecord rec = ev.evolve(to_complex(gs0.u), eo);
    stat = newton_law_check(rec, m0, dom.dim);
  }

  const double dt_c = c.dt, dt_f = 0.5 * c.dt;
  // Richardson constant from the two levels: gap ~ C dt^2 + floor.
  const double C_mom = (4.0 / 3.0) *
                       std::max(0.0, study.coarse.momentum_gap_max - study.fine.momentum_gap_max) /
                       (dt_c * dt_c);
  auto mom_bound = [&](double dt) { return 1e-6 + C_mom * dt * dt; };

  json rep;
  auto rep_level = [&](const NewtonReport& r) {
    return json{{"n_checked", r.n_checked},
                {"dt_samples", r.dt_samples},
                {"momentum_gap_max", r.momentum_gap_max},
                {"newton_gap_max", r.newton_gap_max},
                {"force_V_max", r.force_V_max},
                {"force_b_max", r.force_b_max},
                {"ok", r.ok},
                {"note", r.note}};
  };
  rep["coarse"] = rep_level(study.coarse);
  rep["fine"] = rep_level(study.fine);
  rep["order_momentum"] = study.order_momentum;
  rep["order_newton"] = study.order_newton;
  rep["richardson_C_momentum"] = C_mom;
  rep["stationary"] = rep_level(stat);
  write_text(ctx.out_dir + "/newton.json", rep.dump(2) + "\n");
  ctx.report = rep;

  ctx.gate("momentum-law gap (coarse)", study.coarse.momentum_gap_max, mom_bound(dt_c),
           study.coarse.ok && study.coarse.momentum_gap_max <= mom_bound(dt_c));
  ctx.gate("momentum-law gap (fine)", study.fine.momentum_gap_max, mom_bound(dt_f),
           study.fine.ok && study.fine.momentum_gap_max <= mom_bound(dt_f));
  ctx.gate("force-law empirical order >= 1.8", study.order_newton, 1.8,
           study.order_newton >= 1.8);
  ctx.gate("stationary potential force below 1e-6", stat.force_V_max, 1e-6,
           stat.ok && stat.force_V_max < 1e-6);
  ctx.gate("stationary boundary force below 1e-6", stat.force_b_max, 1e-6,
           stat.ok && stat.force_b_max < 1e-6);
  return finish(ctx, start);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlselab: bounded-domain nonlinear Schrodinger laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int jobs = 0, grid_nodes = 0;
  double dt = 0.0;
  bool seed_set = false, jobs_set = false, grid_set = false, dt_set = false;

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"validate", "parse the configuration, build the grid and check the model conditions"},
      {"ground-state", "minimize the action on the charge sphere"},
      {"evolve", "integrate the equation and record conserved-quantity diagnostics"},
      {"stability", "perturbation ensembles against the ground-state orbit"},
      {"sweep-l2", "small-h mass localization sweep"},
      {"sweep-h1", "small-h gradient localization sweep"},
      {"newton", "barycenter force-law check with two-level refinement"},
  };
  for (const auto& [name, desc] : subs) {
    CLI::App* sc = app.add_subcommand(name, desc);
    sc->add_option("--config", config_path, "configuration file (defaults used when absent)");
    sc->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sc->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      seed_set = true;
    });
    sc->add_option("--jobs", jobs, "parallel jobs override")->each([&](const std::string&) {
      jobs_set = true;
    });
    sc->add_option("--dt", dt, "time-step override")->each([&](const std::string&) {
      dt_set = true;
    });
    sc->add_option("--grid", grid_nodes, "nodes-per-axis override")
        ->each([&](const std::string&) { grid_set = true; });
  }

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().at(0)->get_name();

  RunContext ctx;
  ctx.sub = sub;
  {
    std::ostringstream cmd;
    for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];
    ctx.command = cmd.str();
  }

  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read config " << config_path << "\n";
      return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    ConfigParse parsed = parse_config(ss.str());
    if (!parsed.ok) {
      for (const auto& e : parsed.errors)
        std::cerr << config_path << ":" << e.line << ": " << e.message << "\n";
      return 2;
    }
    ctx.cfg = parsed.config;
  }
  if (seed_set) ctx.cfg.seed = seed;
  if (jobs_set) ctx.cfg.jobs = jobs;
  if (dt_set) ctx.cfg.dt = dt;
  if (grid_set) ctx.cfg.nodes_per_axis = grid_nodes;
  if (!out_dir.empty()) ctx.cfg.out_dir = out_dir;
  ctx.out_dir = ctx.cfg.out_dir;

  const std::vector<std::string> cross = validate_for_subcommand(ctx.cfg, sub);
  if (!cross.empty()) {
    for (const auto& e : cross) std::cerr << "error: " << e << "\n";
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    fs::create_directories(ctx.out_dir);
    if (sub == "validate") return cmd_validate(ctx, start);
    if (sub == "ground-state") return cmd_ground_state(ctx, start);
    if (sub == "evolve") return cmd_evolve(ctx, start);
    if (sub == "stability") return cmd_stability(ctx, start);
    if (sub == "sweep-l2") return cmd_sweep(ctx, start, false);
    if (sub == "sweep-h1") return cmd_sweep(ctx, start, true);
    if (sub == "newton") return cmd_newton(ctx, start);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  std::cerr << "error: unknown subcommand " << sub << "\n";
  return 2;
}
