#include "nlse/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace nlse {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Reader {
  std::map<std::string, Entry> entries;  // "section.key" -> value
  std::vector<ConfigError>* errors = nullptr;

  Entry* find(const std::string& sec, const std::string& key) {
    auto it = entries.find(sec + "." + key);
    if (it == entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }
  void fail(const Entry& e, const std::string& msg) { errors->push_back({e.line, msg}); }

  bool parse_double(const Entry& e, const std::string& what, double& out) {
    const std::string v = trim(e.value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) {
      fail(e, what + ": expected a number, got '" + e.value + "'");
      return false;
    }
    out = x;
    return true;
  }

  void get_double(const std::string& sec, const std::string& key, double& field) {
    if (Entry* e = find(sec, key)) {
      double x;
      if (parse_double(*e, sec + "." + key, x)) field = x;
    }
  }
  void get_int(const std::string& sec, const std::string& key, int& field) {
    if (Entry* e = find(sec, key)) {
      double x;
      if (!parse_double(*e, sec + "." + key, x)) return;
      if (x != double(int(x))) {
        fail(*e, sec + "." + key + ": expected an integer, got '" + e->value + "'");
        return;
      }
      field = int(x);
    }
  }
  void get_u64(const std::string& sec, const std::string& key, std::uint64_t& field) {
    if (Entry* e = find(sec, key)) {
      const std::string v = trim(e->value);
      char* end = nullptr;
      const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
      if (v.empty() || end != v.c_str() + v.size()) {
        fail(*e, sec + "." + key + ": expected a nonnegative integer, got '" + e->value + "'");
        return;
      }
      field = x;
    }
  }
  void get_string(const std::string& sec, const std::string& key, std::string& field) {
    if (Entry* e = find(sec, key)) field = trim(e->value);
  }
  void get_enum(const std::string& sec, const std::string& key, std::string& field,
                const std::set<std::string>& allowed) {
    if (Entry* e = find(sec, key)) {
      const std::string v = trim(e->value);
      if (!allowed.count(v)) {
        std::string opts;
        for (const auto& a : allowed) opts += (opts.empty() ? "" : " | ") + a;
        fail(*e, sec + "." + key + ": '" + v + "' is not one of {" + opts + "}");
        return;
      }
      field = v;
    }
  }
  bool parse_list(const Entry& e, const std::string& what, std::vector<double>& out) {
    out.clear();
    std::string item;
    std::istringstream is(e.value);
    while (std::getline(is, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      char* end = nullptr;
      const double x = std::strtod(item.c_str(), &end);
      if (end != item.c_str() + item.size()) {
        fail(e, what + ": '" + item + "' is not a number");
        return false;
      }
      out.push_back(x);
    }
    if (out.empty()) {
      fail(e, what + ": empty list");
      return false;
    }
    return true;
  }
  void get_dlist(const std::string& sec, const std::string& key, std::vector<double>& field) {
    if (Entry* e = find(sec, key)) {
      std::vector<double> xs;
      if (parse_list(*e, sec + "." + key, xs)) field = xs;
    }
  }
  void get_vec3(const std::string& sec, const std::string& key, Vec3& field) {
    if (Entry* e = find(sec, key)) {
      std::vector<double> xs;
      if (!parse_list(*e, sec + "." + key, xs)) return;
      if (xs.size() > 3) {
        fail(*e, sec + "." + key + ": at most three components");
        return;
      }
      for (std::size_t a = 0; a < 3; ++a) field[a] = a < xs.size() ? xs[a] : field[a];
      // A single value broadcasts across the axes.
      if (xs.size() == 1) field[1] = field[2] = xs[0];
    }
  }
};

}  // namespace

ConfigParse parse_config(const std::string& text) {
  ConfigParse out;
  static const std::set<std::string> kSections = {"domain", "grid",       "model", "solver",
                                                 "evolve", "experiment", "output"};
  Reader rd;
  rd.errors = &out.errors;

  std::istringstream is(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        out.errors.push_back({lineno, "unterminated section header '" + line + "'"});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section)) {
        out.errors.push_back({lineno, "unknown section [" + section + "]"});
        section.clear();
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      out.errors.push_back({lineno, "expected 'key = value', got '" + line + "'"});
      continue;
    }
    if (section.empty()) {
      out.errors.push_back({lineno, "key outside any section: '" + line + "'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      out.errors.push_back({lineno, "empty key"});
      continue;
    }
    const std::string full = section + "." + key;
    auto it = rd.entries.find(full);
    if (it != rd.entries.end()) {
      out.errors.push_back({lineno, "duplicate key '" + full + "' (lines " +
                                        std::to_string(it->second.line) + " and " +
                                        std::to_string(lineno) + ")"});
      continue;
    }
    rd.entries[full] = Entry{value, lineno, false};
  }

  RunConfig& c = out.config;
  rd.get_enum("domain", "kind", c.domain_kind, {"box", "ball"});
  rd.get_int("domain", "dim", c.dim);
  rd.get_vec3("domain", "center", c.center);
  rd.get_vec3("domain", "half_widths", c.half_widths);
  rd.get_double("domain", "radius", c.radius);

  rd.get_int("grid", "nodes_per_axis", c.nodes_per_axis);

  rd.get_enum("model", "w_family", c.w_family, {"sin_power", "zero", "table"});
  rd.get_double("model", "p", c.p);
  rd.get_double("model", "w_amp", c.w_amp);
  rd.get_string("model", "w_table", c.w_table);
  rd.get_enum("model", "v_family", c.v_family, {"zero", "quadratic_well", "table"});
  rd.get_double("model", "v2", c.v2);
  rd.get_vec3("model", "v_center", c.v_center);
  rd.get_string("model", "v_table", c.v_table);
  rd.get_double("model", "alpha", c.alpha);
  rd.get_double("model", "h", c.h);
  rd.get_dlist("model", "h_list", c.h_list);
  rd.get_double("model", "sigma", c.sigma);

  rd.get_double("solver", "tol_res", c.tol_res);
  rd.get_int("solver", "max_iter", c.max_iter);
  rd.get_double("solver", "dt_init", c.dt_init);
  rd.get_int("solver", "n_starts", c.n_starts);

  rd.get_enum("evolve", "scheme", c.scheme, {"crank_nicolson", "strang_splitting"});
  rd.get_double("evolve", "dt", c.dt);
  rd.get_double("evolve", "T", c.T);
  rd.get_double("evolve", "fp_tol", c.fp_tol);
  rd.get_int("evolve", "fp_max", c.fp_max);
  rd.get_int("evolve", "sample_every", c.sample_every);
  rd.get_int("evolve", "snapshot_every_samples", c.snapshot_every_samples);
  rd.get_enum("evolve", "initial", c.initial, {"ground_state", "kicked", "perturbed"});
  rd.get_double("evolve", "kick", c.kick);
  rd.get_double("evolve", "perturb", c.perturb);
  rd.get_double("evolve", "gate_charge", c.gate_charge);
  rd.get_double("evolve", "gate_energy", c.gate_energy);

  rd.get_double("experiment", "K", c.K);
  rd.get_double("experiment", "eps", c.eps);
  rd.get_dlist("experiment", "deltas", c.deltas);
  rd.get_int("experiment", "ensemble", c.ensemble);
  rd.get_int("experiment", "n_phase_grid", c.n_phase_grid);
  rd.get_double("experiment", "kick_scale", c.kick_scale);
  rd.get_double("experiment", "w_h1_rel", c.w_h1_rel);
  rd.get_double("experiment", "T", c.T_exp);
  rd.get_u64("experiment", "seed", c.seed);
  rd.get_enum("experiment", "setting", c.setting, {"bounded", "large_box"});
  rd.get_double("experiment", "spread_tol", c.spread_tol);
  rd.get_double("experiment", "C_bound", c.C_bound);
  rd.get_double("experiment", "newton_kick", c.newton_kick);
  rd.get_double("experiment", "box_factor", c.box_factor);
  rd.get_int("experiment", "jobs", c.jobs);

  rd.get_string("output", "dir", c.out_dir);

  for (const auto& [full, e] : rd.entries)
    if (!e.used) out.errors.push_back({e.line, "unknown key '" + full + "'"});

  // Semantic validation anchored to the offending entry where one exists.
  auto line_of = [&](const std::string& full) {
    auto it = rd.entries.find(full);
    return it == rd.entries.end() ? 0 : it->second.line;
  };
  auto check = [&](bool ok, const std::string& entry, const std::string& msg) {
    if (!ok) out.errors.push_back({line_of(entry), msg});
  };
  check(c.dim >= 1 && c.dim <= 3, "domain.dim", "domain.dim must be 1, 2 or 3");
  if (c.domain_kind == "box")
    for (int a = 0; a < c.dim; ++a)
      check(c.half_widths[a] > 0.0, "domain.half_widths", "box half-widths must be positive");
  if (c.domain_kind == "ball")
    check(c.radius > 0.0, "domain.radius", "ball radius must be positive");
  check(c.nodes_per_axis >= 3, "grid.nodes_per_axis", "grid needs at least 3 nodes per axis");
  if (c.w_family == "sin_power")
    check(c.p > 2.0, "model.p", "sin_power growth exponent p must exceed 2");
  if (c.w_family == "table")
    check(!c.w_table.empty(), "model.w_table", "w_family = table requires model.w_table");
  if (c.v_family == "table")
    check(!c.v_table.empty(), "model.v_table", "v_family = table requires model.v_table");
  check(c.v2 >= 0.0, "model.v2", "quadratic well coefficient must be nonnegative");
  check(c.alpha >= 0.0, "model.alpha", "alpha must be nonnegative");
  check(c.h > 0.0, "model.h", "h must be positive");
  check(c.sigma > 0.0, "model.sigma", "sigma must be positive");
  for (std::size_t i = 1; i < c.h_list.size(); ++i)
    check(c.h_list[i] < c.h_list[i - 1], "model.h_list", "h_list must be strictly decreasing");
  for (double hv : c.h_list) check(hv > 0.0, "model.h_list", "h_list entries must be positive");
  check(c.tol_res > 0.0, "solver.tol_res", "solver.tol_res must be positive");
  check(c.max_iter > 0, "solver.max_iter", "solver.max_iter must be positive");
  check(c.dt_init > 0.0, "solver.dt_init", "solver.dt_init must be positive");
  check(c.n_starts >= 1, "solver.n_starts", "solver.n_starts must be at least 1");
  check(c.dt > 0.0, "evolve.dt", "evolve.dt must be positive");
  check(c.T >= 0.0, "evolve.T", "evolve.T must be nonnegative");
  check(c.fp_tol > 0.0, "evolve.fp_tol", "evolve.fp_tol must be positive");
  check(c.fp_max >= 1, "evolve.fp_max", "evolve.fp_max must be at least 1");
  check(c.sample_every >= 1, "evolve.sample_every", "evolve.sample_every must be at least 1");
  check(c.snapshot_every_samples >= 0, "evolve.snapshot_every_samples",
        "evolve.snapshot_every_samples must be nonnegative");
  check(c.K > 0.0, "experiment.K", "experiment.K must be positive");
  check(c.eps > 0.0 && c.eps < 1.0, "experiment.eps", "experiment.eps must lie in (0, 1)");
  for (std::size_t i = 1; i < c.deltas.size(); ++i)
    check(c.deltas[i] < c.deltas[i - 1], "experiment.deltas",
          "experiment.deltas must be strictly decreasing");
  for (double d : c.deltas)
    check(d >= 0.0, "experiment.deltas", "experiment.deltas entries must be nonnegative");
  check(c.ensemble >= 1, "experiment.ensemble", "experiment.ensemble must be at least 1");
  check(c.n_phase_grid >= 1, "experiment.n_phase_grid",
        "experiment.n_phase_grid must be at least 1");
  check(c.T_exp >= 0.0, "experiment.T", "experiment.T must be nonnegative");
  check(c.spread_tol > 0.0, "experiment.spread_tol", "experiment.spread_tol must be positive");
  check(c.jobs >= 1, "experiment.jobs", "experiment.jobs must be at least 1");
  check(!c.out_dir.empty(), "output.dir", "output.dir must not be empty");

  out.ok = out.errors.empty();
  return out;
}

DomainSpec RunConfig::domain() const {
  if (domain_kind == "ball") return DomainSpec::ball_domain(dim, center, radius);
  return DomainSpec::box_domain(dim, center, half_widths);
}

ModelSpec RunConfig::model() const {
  ModelSpec m;
  if (w_family == "sin_power") m.w_family = WFamily::sin_power;
  else if (w_family == "zero") m.w_family = WFamily::zero;
  else m.w_family = WFamily::table;
  m.p = p;
  m.w_amp = w_amp;
  m.w_table_path = w_table;
  if (v_family == "zero") m.v_family = VFamily::zero;
  else if (v_family == "quadratic_well") m.v_family = VFamily::quadratic_well;
  else m.v_family = VFamily::table;
  m.v2 = v2;
  m.v_center = v_center;
  m.v_table_path = v_table;
  m.alpha = alpha;
  m.h = h;
  m.sigma = sigma;
  m.finalize();
  return m;
}

MinimizeOpts RunConfig::minimize_opts() const {
  MinimizeOpts o;
  o.tol_res = tol_res;
  o.max_iter = max_iter;
  o.dt_init = dt_init;
  o.n_starts = n_starts;
  o.seed = seed;
  return o;
}

EvolveOpts RunConfig::evolve_opts() const {
  EvolveOpts o;
  o.scheme = scheme_enum();
  o.dt = dt;
  o.T = T;
  o.fp_tol = fp_tol;
  o.fp_max = fp_max;
  o.sample_every = sample_every;
  o.snapshot_every_samples = snapshot_every_samples;
  return o;
}

Scheme RunConfig::scheme_enum() const {
  if (scheme == "strang_splitting") return Scheme::strang_splitting;
  if (scheme == "crank_nicolson") return Scheme::crank_nicolson;
  throw std::invalid_argument("unknown scheme '" + scheme + "'");
}

std::string RunConfig::resolved_json() const {
  nlohmann::json j;
  auto vec = [&](const Vec3& v) { return std::vector<double>{v[0], v[1], v[2]}; };
  j["domain"] = {{"kind", domain_kind}, {"dim", dim},       {"center", vec(center)},
                 {"half_widths", vec(half_widths)},         {"radius", radius}};
  j["grid"] = {{"nodes_per_axis", nodes_per_axis}};
  j["model"] = {{"w_family", w_family}, {"p", p},           {"w_amp", w_amp},
                {"w_table", w_table},   {"v_family", v_family},
                {"v2", v2},             {"v_center", vec(v_center)},
                {"v_table", v_table},   {"alpha", alpha},
                {"h", h},               {"h_list", h_list},
                {"sigma", sigma}};
  j["solver"] = {{"tol_res", tol_res},
                 {"max_iter", max_iter},
                 {"dt_init", dt_init},
                 {"n_starts", n_starts}};
  j["evolve"] = {{"scheme", scheme},
                 {"dt", dt},
                 {"T", T},
                 {"fp_tol", fp_tol},
                 {"fp_max", fp_max},
                 {"sample_every", sample_every},
                 {"snapshot_every_samples", snapshot_every_samples},
                 {"initial", initial},
                 {"kick", kick},
                 {"perturb", perturb},
                 {"gate_charge", gate_charge},
                 {"gate_energy", gate_energy}};
  j["experiment"] = {{"K", K},
                     {"eps", eps},
                     {"deltas", deltas},
                     {"ensemble", ensemble},
                     {"n_phase_grid", n_phase_grid},
                     {"kick_scale", kick_scale},
                     {"w_h1_rel", w_h1_rel},
                     {"T", T_exp},
                     {"seed", seed},
                     {"setting", setting},
                     {"spread_tol", spread_tol},
                     {"C_bound", C_bound},
                     {"newton_kick", newton_kick},
                     {"box_factor", box_factor},
                     {"jobs", jobs}};
  j["output"] = {{"dir", out_dir}};
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_for_subcommand(const RunConfig& c, const std::string& sub) {
  std::vector<std::string> errs;
  const bool semiclassical = sub == "sweep-l2" || sub == "sweep-h1";
  const bool variational = semiclassical || sub == "stability";
  if (variational && c.w_family == "sin_power") {
    const double hi = 2.0 + 4.0 / double(c.dim);
    if (!(c.p > 2.0 && c.p < hi)) {
      std::ostringstream os;
      os << "model.p = " << c.p << " violates the growth window (2, 2 + 4/N) = (2, " << hi
         << ") with N = " << c.dim << " required by " << sub;
      errs.push_back(os.str());
    }
  }
  if (variational && c.w_family == "zero")
    errs.push_back(sub + " needs a nontrivial nonlinearity (w_family = zero)");
  if (semiclassical && c.h_list.size() < 2)
    errs.push_back(sub + " needs at least two h values in model.h_list");
  if (sub == "stability" && c.deltas.size() < 2)
    errs.push_back("stability needs at least two perturbation sizes in experiment.deltas");
  if (c.scheme == "strang_splitting" && c.domain_kind != "box")
    errs.push_back("strang_splitting requires a box domain (sine-basis propagator)");
  if (sub == "newton") {
    if (c.h != 1.0) errs.push_back("newton runs the reduced equation: set model.h = 1");
    if (c.alpha != 1.0) errs.push_back("newton runs the reduced equation: set model.alpha = 1");
  }
  return errs;
}

}  // namespace nlse
