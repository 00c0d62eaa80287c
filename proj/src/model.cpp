#include "nlse/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlse {

// ---------------------------------------------------------------------------
// Spline table

static SplineTable load_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open table: " + path);
  SplineTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b))
      throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                               ": expected two numeric columns");
    t.x.push_back(a);
    t.y.push_back(b);
  }
  if (t.x.size() < 3) throw std::runtime_error(path + ": need at least 3 rows");
  for (std::size_t i = 1; i < t.x.size(); ++i)
    if (!(t.x[i] > t.x[i - 1]))
      throw std::runtime_error(path + ": first column must be strictly increasing");

  // Natural cubic spline second derivatives (tridiagonal sweep).
  const std::size_t n = t.x.size();
  t.y2.assign(n, 0.0);
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double sig = (t.x[i] - t.x[i - 1]) / (t.x[i + 1] - t.x[i - 1]);
    const double pp = sig * t.y2[i - 1] + 2.0;
    t.y2[i] = (sig - 1.0) / pp;
    u[i] = (t.y[i + 1] - t.y[i]) / (t.x[i + 1] - t.x[i]) -
           (t.y[i] - t.y[i - 1]) / (t.x[i] - t.x[i - 1]);
    u[i] = (6.0 * u[i] / (t.x[i + 1] - t.x[i - 1]) - sig * u[i - 1]) / pp;
  }
  for (std::size_t i = n - 1; i-- > 0;) t.y2[i] = t.y2[i] * t.y2[i + 1] + u[i];
  return t;
}

static std::size_t bracket(const SplineTable& t, double s) {
  auto it = std::upper_bound(t.x.begin(), t.x.end(), s);
  std::size_t hi = static_cast<std::size_t>(it - t.x.begin());
  hi = std::clamp<std::size_t>(hi, 1, t.x.size() - 1);
  return hi;
}

double SplineTable::eval(double s) const {
  s = std::clamp(s, x.front(), x.back());  // flat extension beyond the knots
  const std::size_t hi = bracket(*this, s), lo = hi - 1;
  const double hh = x[hi] - x[lo];
  const double a = (x[hi] - s) / hh, b = (s - x[lo]) / hh;
  return a * y[lo] + b * y[hi] +
         ((a * a * a - a) * y2[lo] + (b * b * b - b) * y2[hi]) * hh * hh / 6.0;
}

double SplineTable::deriv(double s) const {
  if (s < x.front() || s > x.back()) return 0.0;
  const std::size_t hi = bracket(*this, s), lo = hi - 1;
  const double hh = x[hi] - x[lo];
  const double a = (x[hi] - s) / hh, b = (s - x[lo]) / hh;
  return (y[hi] - y[lo]) / hh +
         ((3.0 * b * b - 1.0) * y2[hi] - (3.0 * a * a - 1.0) * y2[lo]) * hh / 6.0;
}

double SplineTable::deriv2(double s) const {
  if (s < x.front() || s > x.back()) return 0.0;
  const std::size_t hi = bracket(*this, s), lo = hi - 1;
  const double hh = x[hi] - x[lo];
  const double a = (x[hi] - s) / hh, b = (s - x[lo]) / hh;
  return a * y2[lo] + b * y2[hi];
}

// ---------------------------------------------------------------------------
// ModelSpec

void ModelSpec::finalize() {
  if (!(h > 0.0)) throw std::invalid_argument("model: h must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("model: alpha must be nonnegative");
  if (!(sigma > 0.0)) throw std::invalid_argument("model: sigma must be positive");
  if (w_family != WFamily::zero && !(p > 2.0))
    throw std::invalid_argument("model: p must exceed 2");
  if (w_family == WFamily::table) {
    if (w_table_path.empty()) throw std::invalid_argument("model: table W needs a file path");
    w_table = load_table(w_table_path);
    if (w_table.x.front() < 0.0)
      throw std::runtime_error(w_table_path + ": W table must cover s >= 0 only (even extension)");
  }
  if (v_family == VFamily::table) {
    if (v_table_path.empty()) throw std::invalid_argument("model: table V needs a file path");
    v_table = load_table(v_table_path);
    if (v_table.x.front() < 0.0)
      throw std::runtime_error(v_table_path + ": V table radius column must be nonnegative");
    for (double val : v_table.y)
      if (val < 0.0)
        throw std::runtime_error(v_table_path + ": V table values must be nonnegative");
  }
  if (v_family == VFamily::quadratic_well && v2 < 0.0)
    throw std::invalid_argument("model: quadratic well needs v2 >= 0");
  if (s0 == 0.0 && w_family == WFamily::sin_power)
    s0 = std::pow(1.5 * M_PI, 1.0 / p);  // |s0|^p = 3 pi / 2, where sin = -1
}

double eval_W(const ModelSpec& m, double s) {
  const double a = std::abs(s);
  switch (m.w_family) {
    case WFamily::sin_power:
      return m.w_amp * std::sin(std::pow(a, m.p));
    case WFamily::zero:
      return 0.0;
    case WFamily::table:
      return m.w_table.eval(a);
  }
  return 0.0;
}

double eval_Wprime(const ModelSpec& m, double s) {
  const double a = std::abs(s);
  const double sgn = (s >= 0.0) ? 1.0 : -1.0;
  switch (m.w_family) {
    case WFamily::sin_power:
      return sgn * m.w_amp * m.p * std::pow(a, m.p - 1.0) * std::cos(std::pow(a, m.p));
    case WFamily::zero:
      return 0.0;
    case WFamily::table:
      return sgn * m.w_table.deriv(a);
  }
  return 0.0;
}

double eval_Wsecond(const ModelSpec& m, double s) {
  const double a = std::abs(s);
  switch (m.w_family) {
    case WFamily::sin_power: {
      const double ap = std::pow(a, m.p);
      return m.w_amp * m.p *
             (((m.p - 1.0) * std::pow(a, m.p - 2.0)) * std::cos(ap) -
              m.p * std::pow(a, 2.0 * m.p - 2.0) * std::sin(ap));
    }
    case WFamily::zero:
      return 0.0;
    case WFamily::table:
      return m.w_table.deriv2(a);
  }
  return 0.0;
}

double nonlinear_quotient(const ModelSpec& m, double s) {
  const double a = std::abs(s);
  if (a <= eps_quot) return 0.0;
  if (m.w_family == WFamily::sin_power) {
    // Analytic reduced form W'(s)/s = amp * p * s^{p-2} cos(s^p); avoids the
    // 0/0 cancellation near the origin.
    const double ap = std::pow(a, m.p);
    return m.w_amp * m.p * std::pow(a, m.p - 2.0) * std::cos(ap);
  }
  return eval_Wprime(m, a) / a;
}

double eval_V(const ModelSpec& m, const Vec3& x, int dim) {
  switch (m.v_family) {
    case VFamily::zero:
      return 0.0;
    case VFamily::quadratic_well: {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double d = x[a] - m.v_center[a];
        r2 += d * d;
      }
      return m.v2 * r2;
    }
    case VFamily::table: {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double d = x[a] - m.v_center[a];
        r2 += d * d;
      }
      return m.v_table.eval(std::sqrt(r2));
    }
  }
  return 0.0;
}

Vec3 grad_V(const ModelSpec& m, const Vec3& x, int dim) {
  Vec3 g{0, 0, 0};
  switch (m.v_family) {
    case VFamily::zero:
      break;
    case VFamily::quadratic_well:
      for (int a = 0; a < dim; ++a) g[a] = 2.0 * m.v2 * (x[a] - m.v_center[a]);
      break;
    case VFamily::table: {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double d = x[a] - m.v_center[a];
        r2 += d * d;
      }
      const double r = std::sqrt(r2);
      if (r > 1e-14) {
        const double dv = m.v_table.deriv(r);
        for (int a = 0; a < dim; ++a) g[a] = dv * (x[a] - m.v_center[a]) / r;
      }
      break;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Condition validation

std::string ConditionReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.pass ? "[ok]   " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
  return os.str();
}

ConditionReport validate_conditions(const ModelSpec& m, int dim) {
  ConditionReport rep;
  const double s_max = 8.0;
  const int n_samp = 4001;

  // Evenness and boundedness of W (core).
  {
    ConditionCheck c{"W even and bounded", true, true, ""};
    double k_bound = 0.0, worst_even = 0.0;
    for (int i = 0; i < n_samp; ++i) {
      const double s = s_max * i / (n_samp - 1.0);
      k_bound = std::max(k_bound, std::abs(eval_W(m, s)));
      worst_even = std::max(worst_even, std::abs(eval_W(m, s) - eval_W(m, -s)));
    }
    c.pass = std::isfinite(k_bound) && worst_even == 0.0;
    c.detail = "sup |W| = " + std::to_string(k_bound) + " on [0," + std::to_string(s_max) +
               "], even-mismatch " + std::to_string(worst_even);
    rep.checks.push_back(c);
  }

  // |W'(s)| <= c |s|^{p-1} (core).
  {
    ConditionCheck c{"derivative envelope |W'| <= c|s|^{p-1}", true, true, ""};
    double c_env = 0.0;
    bool finite = true;
    for (int i = 1; i < n_samp; ++i) {
      const double s = s_max * i / (n_samp - 1.0);
      const double ratio = std::abs(eval_Wprime(m, s)) / std::pow(s, m.p - 1.0);
      if (!std::isfinite(ratio)) finite = false;
      c_env = std::max(c_env, ratio);
    }
    c.pass = finite;
    c.detail = "c = " + std::to_string(c_env);
    rep.checks.push_back(c);
  }

  // |W''(s)| <= c |s|^{p-2} near the origin (core, used by the well-posedness
  // arguments; away from 0 the sampled envelope constant is reported).
  {
    ConditionCheck c{"second-derivative envelope |W''| <= c|s|^{p-2}", true, true, ""};
    double c_env = 0.0;
    bool finite = true;
    for (int i = 1; i < n_samp; ++i) {
      const double s = s_max * i / (n_samp - 1.0);
      const double ratio = std::abs(eval_Wsecond(m, s)) / std::pow(s, m.p - 2.0);
      if (!std::isfinite(ratio)) finite = false;
      c_env = std::max(c_env, ratio);
    }
    c.pass = finite;
    c.detail = "c = " + std::to_string(c_env);
    rep.checks.push_back(c);
  }

  // W(0) = 0 (normalization used by the boundary-force identity).
  {
    ConditionCheck c{"W(0) = 0", true, eval_W(m, 0.0) == 0.0,
                     "W(0) = " + std::to_string(eval_W(m, 0.0))};
    rep.checks.push_back(c);
  }

  // V continuous and nonnegative (core when V is present).
  {
    ConditionCheck c{"V nonnegative", true, true, ""};
    if (m.v_family == VFamily::quadratic_well) {
      c.pass = m.v2 >= 0.0;
      c.detail = "v2 = " + std::to_string(m.v2);
    } else if (m.v_family == VFamily::table) {
      double vmin = 0.0;
      for (double v : m.v_table.y) vmin = std::min(vmin, v);
      c.pass = vmin >= 0.0;
      c.detail = "min table value = " + std::to_string(vmin);
    } else {
      c.detail = "V == 0";
    }
    rep.checks.push_back(c);
  }

  // Negativity witness W(s0) < 0 (localization sections).
  {
    ConditionCheck c{"negativity witness W(s0) < 0", false, false, ""};
    const double w0 = eval_W(m, m.s0);
    c.pass = (m.s0 > 0.0) && (w0 < 0.0);
    c.detail = "s0 = " + std::to_string(m.s0) + ", W(s0) = " + std::to_string(w0);
    rep.checks.push_back(c);
  }

  // p-window for the localization sections: 2 < p < 2 + 4/dim.
  {
    ConditionCheck c{"p in (2, 2 + 4/N)", false, false, ""};
    const double p_hi = 2.0 + 4.0 / dim;
    c.pass = (m.w_family == WFamily::zero) ? false : (m.p > 2.0 && m.p < p_hi);
    c.detail = "p = " + std::to_string(m.p) + ", window (2, " + std::to_string(p_hi) + ")";
    rep.checks.push_back(c);
  }

  // Core subcritical window 2 < p < 2N/(N-2) (infinite for N <= 2).
  {
    ConditionCheck c{"p subcritical", true, true, ""};
    if (m.w_family != WFamily::zero) {
      const double p_star = (dim >= 3) ? 2.0 * dim / (dim - 2.0) : 0.0;
      c.pass = m.p > 2.0 && (dim <= 2 || m.p < p_star);
      c.detail = "p = " + std::to_string(m.p) +
                 (dim >= 3 ? ", 2* = " + std::to_string(p_star) : ", 2* = inf");
    } else {
      c.detail = "W == 0 (validation model)";
    }
    rep.checks.push_back(c);
  }

  rep.core_ok = true;
  rep.localization_ok = true;
  for (const auto& c : rep.checks) {
    if (c.required_for_core && !c.pass) rep.core_ok = false;
    if (!c.pass) rep.localization_ok = false;
  }
  // The localization studies require the core conditions too.
  rep.localization_ok = rep.localization_ok && rep.core_ok;
  return rep;
}

}  // namespace nlse
