#include "nlse/functionals.hpp"

#include <cmath>
#include <sstream>

#include "nlse/io.hpp"

namespace nlse {

double charge(const RealField& u) { return l2_norm2(u); }
double charge(const ComplexField& psi) { return l2_norm2(psi); }

static double h_pow_nbeta(const GridPtr& g, double h, double alpha) {
  return std::pow(h, g->dim * beta_of(alpha));
}

double charge_h(const RealField& u, double h, double alpha) {
  return charge(u) / h_pow_nbeta(u.grid, h, alpha);
}
double charge_h(const ComplexField& psi, double h, double alpha) {
  return charge(psi) / h_pow_nbeta(psi.grid, h, alpha);
}

double action_scaled(const RealField& u, const ModelSpec& m, double kappa, double w_scale) {
  double wsum = 0.0;
  for (double s : u.v) wsum += eval_W(m, s);
  return 0.5 * kappa * dirichlet_energy(u) + w_scale * wsum * u.grid->cell_volume;
}

double action_J(const RealField& u, const ModelSpec& m) { return action_scaled(u, m, 1.0, 1.0); }

double action_J_h(const RealField& u, const ModelSpec& m) {
  const double tilde = action_scaled(u, m, m.h * m.h, std::pow(m.h, -m.alpha));
  return tilde / h_pow_nbeta(u.grid, m.h, m.alpha);
}

double total_energy(const ComplexField& psi, const ModelSpec& m) {
  const Grid& g = *psi.grid;
  double wsum = 0.0, vsum = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double a = std::abs(psi[i]);
    wsum += eval_W(m, a);
    vsum += eval_V(m, g.coord(static_cast<int32_t>(i)), g.dim) * a * a;
  }
  return 0.5 * m.h * m.h * dirichlet_energy(psi) +
         (std::pow(m.h, -m.alpha) * wsum + vsum) * g.cell_volume;
}

Vec3 barycenter(const ComplexField& psi) {
  const Grid& g = *psi.grid;
  Vec3 num{0, 0, 0};
  double den = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double w = std::norm(psi[i]);
    const Vec3 x = g.coord(static_cast<int32_t>(i));
    for (int a = 0; a < g.dim; ++a) num[a] += x[a] * w;
    den += w;
  }
  Vec3 q{0, 0, 0};
  if (den > 0.0)
    for (int a = 0; a < g.dim; ++a) q[a] = num[a] / den;
  return q;
}

Vec3 momentum(const ComplexField& psi) {
  const auto dpsi = gradient(psi);
  const Grid& g = *psi.grid;
  Vec3 p{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i)
      s += (std::conj(psi[i]) * dpsi[a][i]).imag();
    p[a] = s * g.cell_volume;
  }
  return p;
}

static bool node_outside(const Grid& g, int32_t id, const Vec3& center, double radius) {
  const Vec3 x = g.coord(id);
  double r2 = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    const double d = x[a] - center[a];
    r2 += d * d;
  }
  return r2 >= radius * radius;
}

double mass_outside_ball(const ComplexField& psi, const Vec3& center, double radius, double h,
                         double alpha) {
  const Grid& g = *psi.grid;
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (node_outside(g, static_cast<int32_t>(i), center, radius)) s += std::norm(psi[i]);
  return s * g.cell_volume / h_pow_nbeta(psi.grid, h, alpha);
}

double mass_outside_fraction(const ComplexField& psi, const Vec3& center, double radius) {
  const Grid& g = *psi.grid;
  double out = 0.0, tot = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double w = std::norm(psi[i]);
    tot += w;
    if (node_outside(g, static_cast<int32_t>(i), center, radius)) out += w;
  }
  return tot > 0.0 ? out / tot : 0.0;
}

double grad_ratio_outside_ball(const RealField& u, const Vec3& center, double radius) {
  const Grid& g = *u.grid;
  const auto du = gradient(u);
  double out = 0.0, tot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double g2 = 0.0;
    for (int a = 0; a < g.dim; ++a) g2 += du[a][i] * du[a][i];
    tot += g2;
    if (node_outside(g, static_cast<int32_t>(i), center, radius)) out += g2;
  }
  return tot > 0.0 ? out / tot : 0.0;
}

Vec3 boundary_force(const RealField& u) {
  const auto flux = boundary_flux_samples(u);
  Vec3 F{0, 0, 0};
  for (const auto& s : flux) {
    // Inward normal is -side along the face axis.
    F[s.face->axis] += 0.5 * s.gn2 * (-s.face->side) * s.face->area;
  }
  return F;
}

Vec3 potential_force(const RealField& u, const ModelSpec& m) {
  const Grid& g = *u.grid;
  Vec3 F{0, 0, 0};
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec3 x = g.coord(static_cast<int32_t>(i));
    const Vec3 gv = grad_V(m, x, g.dim);
    for (int a = 0; a < g.dim; ++a) F[a] -= u[i] * u[i] * gv[a];
  }
  for (int a = 0; a < g.dim; ++a) F[a] *= g.cell_volume;
  return F;
}

std::string diagnostics_csv_header(int dim) {
  std::ostringstream os;
  os << "t,charge,energy,J";
  static const char* ax[3] = {"x", "y", "z"};
  for (int a = 0; a < dim; ++a) os << ",q" << ax[a];
  for (int a = 0; a < dim; ++a) os << ",p" << ax[a];
  os << ",mass_out,grad_out";
  for (int a = 0; a < dim; ++a) os << ",Fb_" << ax[a];
  for (int a = 0; a < dim; ++a) os << ",Fv_" << ax[a];
  return os.str();
}

std::string diagnostics_csv_row(const DiagnosticsSample& s, int dim) {
  std::ostringstream os;
  os << fmt_g17(s.t) << "," << fmt_g17(s.charge) << "," << fmt_g17(s.energy) << ","
     << fmt_g17(s.J_value);
  for (int a = 0; a < dim; ++a) os << "," << fmt_g17(s.q[a]);
  for (int a = 0; a < dim; ++a) os << "," << fmt_g17(s.p[a]);
  os << "," << fmt_g17(s.mass_out) << "," << fmt_g17(s.grad_out);
  for (int a = 0; a < dim; ++a) os << "," << fmt_g17(s.Fb[a]);
  for (int a = 0; a < dim; ++a) os << "," << fmt_g17(s.Fv[a]);
  return os.str();
}

}  // namespace nlse
