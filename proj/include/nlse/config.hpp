// Run configuration: a flat sectioned key = value text format with typed
// values, line-anchored parse errors, duplicate-key detection, and rejection
// of unknown keys.  Every field has a default; the resolved configuration
// (defaults included) is echoed verbatim into the run manifest so a run is
// reproducible from the manifest alone.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlse/domain.hpp"
#include "nlse/evolution.hpp"
#include "nlse/ground_state.hpp"
#include "nlse/model.hpp"

namespace nlse {

struct RunConfig {
  // [domain]
  std::string domain_kind = "box";
  int dim = 1;
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 half_widths{1.0, 1.0, 1.0};
  double radius = 1.0;

  // [grid]
  int nodes_per_axis = 401;

  // [model]
  std::string w_family = "sin_power";
  double p = 3.0;
  double w_amp = 1.0;
  std::string w_table;
  std::string v_family = "zero";
  double v2 = 0.0;
  Vec3 v_center{0.0, 0.0, 0.0};
  std::string v_table;
  double alpha = 1.0;
  double h = 1.0;
  std::vector<double> h_list{0.4, 0.3, 0.2};
  double sigma = 1.0;

  // [solver]
  double tol_res = 1e-6;
  int max_iter = 50000;
  double dt_init = 0.5;
  int n_starts = 8;

  // [evolve]
  std::string scheme = "crank_nicolson";
  double dt = 1e-3;
  double T = 1.0;
  double fp_tol = 1e-12;
  int fp_max = 200;
  int sample_every = 10;
  int snapshot_every_samples = 0;
  std::string initial = "ground_state";  // ground_state | kicked | perturbed
  double kick = 0.0;                     // phase gradient magnitude along x for "kicked"
  double perturb = 0.0;                  // relative H1 perturbation for "perturbed"
  double gate_charge = 1e-8;             // evolve subcommand drift gates
  double gate_energy = 1e-6;

  // [experiment]
  double K = 1.0;
  double eps = 0.05;
  std::vector<double> deltas{0.1, 0.03, 0.01};
  int ensemble = 4;
  int n_phase_grid = 256;
  double kick_scale = 0.2;
  double w_h1_rel = 0.0;
  double T_exp = 5.0;
  std::uint64_t seed = 1;
  std::string setting = "bounded";  // bounded | large_box
  double spread_tol = 0.2;
  double C_bound = 5.0;
  double newton_kick = 0.3;
  double box_factor = 8.0;
  int jobs = 1;

  // [output]
  std::string out_dir = "out";

  DomainSpec domain() const;
  ModelSpec model() const;
  MinimizeOpts minimize_opts() const;
  EvolveOpts evolve_opts() const;
  Scheme scheme_enum() const;

  /// The full configuration, defaults included, as a JSON document.
  std::string resolved_json() const;
};

struct ConfigError {
  int line = 0;  // 0 = not tied to a specific line
  std::string message;
};

struct ConfigParse {
  RunConfig config;
  std::vector<ConfigError> errors;
  bool ok = false;
};

/// Parse and validate a configuration document.  All errors are collected
/// (not just the first); ok is true only when there are none.
ConfigParse parse_config(const std::string& text);

/// Cross-field checks that depend on the requested subcommand, e.g. the
/// nonlinearity growth window p in (2, 2 + 4/N) required by the localization
/// and stability experiments.
std::vector<std::string> validate_for_subcommand(const RunConfig& c, const std::string& sub);

}  // namespace nlse
