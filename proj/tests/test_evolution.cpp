#include <cmath>
#include <complex>
#include <stdexcept>

#include "doctest.h"
#include "nlse/evolution.hpp"
#include "nlse/grid.hpp"
#include "nlse/ground_state.hpp"
#include "nlse/linear_solver.hpp"

using namespace nlse;

namespace {

ModelSpec sin_model(double amp) {
  ModelSpec m;
  m.w_family = WFamily::sin_power;
  m.p = 3.0;
  m.w_amp = amp;
  m.finalize();
  return m;
}

GridPtr unit_box(int n) {
  return build_grid(DomainSpec::box_domain(1, Vec3{0, 0, 0}, Vec3{1, 0, 0}), n);
}

}  // namespace

TEST_CASE("zero dt is the identity") {
  auto g = unit_box(51);
  Evolver ev(g, sin_model(1.0));
  auto psi = complex_field_from(g, [](const Vec3& x) {
    return std::polar(std::exp(-x[0] * x[0]), 0.3 * x[0]);
  });
  EvolveOpts o;
  auto out = ev.step(psi, 0.0, o);
  for (std::size_t i = 0; i < psi.size(); ++i) CHECK(out[i] == psi[i]);
}

TEST_CASE("linear midpoint step is the exact Cayley rotation") {
  ModelSpec m;
  m.w_family = WFamily::zero;
  m.finalize();
  auto g = unit_box(101);
  Evolver ev(g, m);
  const double dx = g->dx[0];
  const int k = 3;
  auto mode =
      real_field_from(g, [&](const Vec3& x) { return std::sin(k * M_PI * (x[0] + 1.0) / 2.0); });
  const double mu = (2.0 - 2.0 * std::cos(k * M_PI * dx / 2.0)) / (dx * dx);
  const double dt = 0.01;
  EvolveOpts o;
  o.dt = dt;
  auto out = ev.step(to_complex(mode), dt, o);
  // i psi_t = (mu/2) psi  =>  psi+ = psi (1 - i dt mu/4) / (1 + i dt mu/4)
  const cplx factor = (cplx(1.0, -dt * mu / 4.0)) / (cplx(1.0, dt * mu / 4.0));
  double worst = 0.0;
  for (std::size_t i = 0; i < mode.size(); ++i)
    worst = std::max(worst, std::abs(out[i] - factor * mode[i]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("ground state evolves on its phase orbit") {
  auto m = sin_model(1.0);
  auto g = unit_box(101);
  MinimizeOpts mo;
  mo.n_starts = 2;
  mo.tol_res = 1e-10;
  auto gs = minimize_on_sphere(g, m, 1.0, mo);
  REQUIRE(gs.converged);

  Evolver ev(g, m);
  EvolveOpts o;
  o.dt = 1e-3;
  o.T = 0.5;
  auto rec = ev.evolve(to_complex(gs.u), o);
  REQUIRE(rec.completed);
  CHECK(rec.charge_drift_rel <= 1e-12);
  CHECK(rec.energy_drift_rel <= 1e-10);

  // psi(T) = u exp(-i lambda T / 2) for h = 1 (up to dt^2 phase error)
  ComplexField psi = to_complex(gs.u);
  for (long s = 0; s < 500; ++s) psi = ev.step(psi, 1e-3, o);
  const cplx rot = std::polar(1.0, -0.5 * gs.lambda * 0.5);
  double worst = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    worst = std::max(worst, std::abs(psi[i] - rot * gs.u[i]));
  CHECK(worst <= 1e-5);
}

TEST_CASE("midpoint steps reverse to the initial state") {
  auto m = sin_model(2.0);
  auto g = unit_box(101);
  Evolver ev(g, m);
  auto psi0 = complex_field_from(g, [](const Vec3& x) {
    const double u = std::exp(-8.0 * x[0] * x[0]);
    return std::polar(u, 0.5 * x[0]);
  });
  EvolveOpts o;
  o.fp_tol = 1e-13;
  ComplexField psi = psi0;
  const double dt = 2e-3;
  for (int s = 0; s < 50; ++s) psi = ev.step(psi, dt, o);
  for (int s = 0; s < 50; ++s) psi = ev.step(psi, -dt, o);
  double diff = 0.0, base = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    diff += std::norm(psi[i] - psi0[i]);
    base += std::norm(psi0[i]);
  }
  CHECK(std::sqrt(diff / base) <= 1e-8);
}

TEST_CASE("splitting and midpoint agree to second order") {
  auto m = sin_model(1.0);
  auto g = unit_box(201);
  Evolver ev(g, m);
  // Smooth data that genuinely vanishes at the walls; a plain Gaussian has a
  // jump there that excites modes where the two dispersion relations differ.
  auto psi0 = complex_field_from(g, [](const Vec3& x) {
    const double u = std::exp(-6.0 * x[0] * x[0]) * std::sin(M_PI * (x[0] + 1.0) / 2.0);
    return std::polar(u, 0.5 * x[0]);
  });
  const double T = 0.1;
  auto gap_at = [&](double dt) {
    EvolveOpts cn;
    cn.dt = dt;
    cn.T = T;
    cn.fp_tol = 1e-14;
    EvolveOpts st = cn;
    st.scheme = Scheme::strang_splitting;
    ComplexField a = psi0, b = psi0;
    const int n = int(std::lround(T / dt));
    for (int s = 0; s < n; ++s) {
      a = ev.step(a, cn.dt, cn);
      b = ev.step(b, st.dt, st);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
  };
  const double gap2 = gap_at(2e-3);
  const double gap1 = gap_at(1e-3);
  CHECK(gap1 <= 1e-4);
  // Both schemes are second order, so their disagreement shrinks ~4x per halving.
  CHECK(gap2 / gap1 >= 2.5);
  CHECK(gap2 / gap1 <= 6.0);

  // splitting conserves the discrete charge to rounding
  EvolveOpts st;
  st.scheme = Scheme::strang_splitting;
  st.dt = 1e-3;
  st.T = 0.1;
  auto rec = ev.evolve(psi0, st);
  REQUIRE(rec.completed);
  CHECK(rec.charge_drift_rel <= 1e-13);
}

TEST_CASE("sampling cadence and snapshots") {
  auto m = sin_model(1.0);
  auto g = unit_box(51);
  Evolver ev(g, m);
  auto psi0 = to_complex(real_field_from(
      g, [](const Vec3& x) { return std::exp(-6.0 * x[0] * x[0]); }));
  EvolveOpts o;
  o.dt = 1e-3;
  o.T = 0.05;
  o.sample_every = 10;
  o.snapshot_every_samples = 2;
  auto rec = ev.evolve(psi0, o);
  REQUIRE(rec.completed);
  CHECK(rec.steps == 50);
  CHECK(rec.samples.size() == 6);  // t = 0 and five interior/final samples
  CHECK(rec.samples.front().t == 0.0);
  CHECK(rec.samples.back().t == doctest::Approx(0.05));
  CHECK(rec.snapshots.size() >= 2);
  CHECK(rec.snapshots.front().first == 0.0);
  CHECK(rec.snapshots.back().first == doctest::Approx(0.05));
}

TEST_CASE("interior packet keeps boundary mass negligible") {
  auto m = sin_model(1.0);
  auto g = unit_box(201);
  Evolver ev(g, m);
  auto psi0 = to_complex(real_field_from(
      g, [](const Vec3& x) { return std::exp(-8.0 * x[0] * x[0]); }));
  EvolveOpts o;
  o.dt = 1e-3;
  o.T = 0.02;  // short horizon: the packet must not disperse to the walls
  auto rec = ev.evolve(psi0, o);
  REQUIRE(rec.completed);
  CHECK(rec.boundary_mass_max <= 1e-6);
}

TEST_CASE("fixed point failure surfaces as a failed record") {
  auto m = sin_model(200.0);
  auto g = unit_box(101);
  Evolver ev(g, m);
  auto psi0 = to_complex(real_field_from(
      g, [](const Vec3& x) { return 1.5 * std::exp(-4.0 * x[0] * x[0]); }));
  EvolveOpts o;
  o.dt = 0.5;
  o.T = 1.0;
  o.fp_max = 2;
  CHECK_THROWS_AS(ev.step(psi0, o.dt, o), std::runtime_error);
  auto rec = ev.evolve(psi0, o);
  CHECK(!rec.completed);
  CHECK(!rec.failure.empty());
}

TEST_CASE("evolve argument validation") {
  auto m = sin_model(1.0);
  auto g = unit_box(51);
  Evolver ev(g, m);
  auto psi0 = to_complex(real_field_from(
      g, [](const Vec3& x) { return std::exp(-6.0 * x[0] * x[0]); }));
  EvolveOpts o;
  o.dt = 0.0;
  CHECK_THROWS_AS(ev.evolve(psi0, o), std::invalid_argument);
  o.dt = 1e-3;
  o.T = -1.0;
  CHECK_THROWS_AS(ev.evolve(psi0, o), std::invalid_argument);
  o.T = 1.0;
  o.sample_every = 0;
  CHECK_THROWS_AS(ev.evolve(psi0, o), std::invalid_argument);

  auto g2 = unit_box(21);
  auto psi2 = ComplexField(g2);
  o.sample_every = 1;
  CHECK_THROWS_AS(ev.evolve(psi2, o), std::invalid_argument);
}

TEST_CASE("ball center fit finds an off-center packet") {
  auto g = unit_box(201);
  auto u = real_field_from(
      g, [](const Vec3& x) { return std::exp(-30.0 * (x[0] - 0.3) * (x[0] - 0.3)); });
  const Vec3 c = fit_ball_center(u, 0.25, Vec3{0, 0, 0});
  CHECK(std::abs(c[0] - 0.3) <= 0.05);
}

TEST_CASE("modulus and kinetic phase recover a linear phase") {
  auto g = unit_box(201);
  const double k = 0.7;
  auto psi = complex_field_from(g, [&](const Vec3& x) {
    const double u = std::exp(-3.0 * x[0] * x[0]);
    return std::polar(u, k * x[0]);
  });
  auto [u, kin] = modulus_and_kinetic_phase(psi);
  // kinetic density ~ u^2 k^2 away from the boundary
  const auto id = static_cast<int32_t>(u.size() / 2);
  (void)id;
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = g->coord(static_cast<int32_t>(i))[0];
    if (std::abs(x) > 0.5) continue;  // skip the tiny-amplitude tail
    worst = std::max(worst, std::abs(kin[i] - u[i] * u[i] * k * k));
  }
  CHECK(worst <= 1e-3);
}
