#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "nlse/calculus.hpp"
#include "nlse/domain.hpp"
#include "nlse/field.hpp"
#include "nlse/grid.hpp"
#include "nlse/io.hpp"

using namespace nlse;

TEST_CASE("box domain geometry") {
  auto d = DomainSpec::box_domain(2, Vec3{0.5, 0.0, 0.0}, Vec3{1.0, 2.0, 0.0});
  CHECK(d.contains(Vec3{0.6, 1.9, 0.0}));
  CHECK(!d.contains(Vec3{0.6, 2.1, 0.0}));
  CHECK(!d.contains(Vec3{1.5, 0.0, 0.0}));  // boundary point is not interior
  Vec3 lo, hi;
  d.bounding_box(lo, hi);
  CHECK(lo[0] == doctest::Approx(-0.5));
  CHECK(hi[0] == doctest::Approx(1.5));
  CHECK(lo[1] == doctest::Approx(-2.0));
  CHECK(hi[1] == doctest::Approx(2.0));
  CHECK(d.diameter() == doctest::Approx(std::sqrt(4.0 + 16.0)));
  CHECK(d.distance_to_boundary(Vec3{0.5, 0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(d.distance_to_boundary(Vec3{1.2, 0.0, 0.0}) == doctest::Approx(0.3));
  CHECK(d.distance_to_boundary(Vec3{3.0, 0.0, 0.0}) <= 0.0);
}

TEST_CASE("ball domain geometry") {
  auto d = DomainSpec::ball_domain(2, Vec3{1.0, -1.0, 0.0}, 2.0);
  CHECK(d.contains(Vec3{1.0, 0.9, 0.0}));
  CHECK(!d.contains(Vec3{1.0, 1.1, 0.0}));
  CHECK(d.diameter() == doctest::Approx(4.0));
  CHECK(d.distance_to_boundary(Vec3{1.0, -1.0, 0.0}) == doctest::Approx(2.0));
  CHECK(d.distance_to_boundary(Vec3{2.0, -1.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("domain constructor validation") {
  CHECK_THROWS_AS(DomainSpec::box_domain(4, Vec3{0, 0, 0}, Vec3{1, 1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DomainSpec::box_domain(1, Vec3{0, 0, 0}, Vec3{0.0, 0, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DomainSpec::ball_domain(2, Vec3{0, 0, 0}, -1.0), std::invalid_argument);
}

TEST_CASE("inflation scales shapes about the origin by h^{-beta}") {
  CHECK(beta_of(1.0) == doctest::Approx(1.5));
  CHECK(beta_of(2.0) == doctest::Approx(2.0));

  const double s = std::pow(0.5, -1.5);  // h = 0.5, alpha = 1
  auto b = DomainSpec::box_domain(2, Vec3{0.5, 0.0, 0.0}, Vec3{1.0, 2.0, 0.0});
  auto bi = inflate_domain(b, 0.5, 1.0);
  CHECK(bi.kind == DomainKind::box);
  CHECK(bi.center[0] == doctest::Approx(0.5 * s).epsilon(1e-14));
  CHECK(bi.half_widths[0] == doctest::Approx(s).epsilon(1e-14));
  CHECK(bi.half_widths[1] == doctest::Approx(2.0 * s).epsilon(1e-14));

  auto c = DomainSpec::ball_domain(1, Vec3{0.25, 0, 0}, 1.5);
  auto ci = inflate_domain(c, 0.5, 2.0);  // beta = 2, scale = 4
  CHECK(ci.kind == DomainKind::ball);
  CHECK(ci.radius == doctest::Approx(6.0));
  CHECK(ci.center[0] == doctest::Approx(1.0));

  CHECK_THROWS_AS(inflate_domain(b, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("1d box grid layout") {
  auto d = DomainSpec::box_domain(1, Vec3{0, 0, 0}, Vec3{1, 0, 0});
  auto g = build_grid(d, 5);
  CHECK(g->n_interior() == 3);
  CHECK(g->dx[0] == doctest::Approx(0.5));
  CHECK(g->cell_volume == doctest::Approx(0.5));
  CHECK(g->box_like);
  CHECK(g->coord(0)[0] == doctest::Approx(-0.5));
  CHECK(g->coord(1)[0] == doctest::Approx(0.0));
  CHECK(g->coord(2)[0] == doctest::Approx(0.5));
  // outermost interior nodes see a zero ghost on the outside
  CHECK(g->nbr[0][0] == -1);
  CHECK(g->nbr[0][1] == 1);
  CHECK(g->nbr[2][1] == -1);
  REQUIRE(g->faces.size() == 2);
  CHECK(g->faces[0].area == doctest::Approx(1.0));

  CHECK_THROWS_AS(build_grid(d, 2), std::invalid_argument);
}

TEST_CASE("interior indexing is self-consistent") {
  auto d = DomainSpec::ball_domain(2, Vec3{0, 0, 0}, 1.0);
  auto g = build_grid(d, 23);
  for (std::size_t i = 0; i < g->n_interior(); ++i) {
    const auto id = static_cast<int32_t>(i);
    CHECK(g->interior_id[g->interior_flat[i]] == id);
    const Vec3 x = g->coord(id);
    CHECK(d.contains(x));
  }
  // 2d faces carry the transverse spacing as area
  for (const auto& f : g->faces) {
    CHECK(f.node >= 0);
    CHECK(f.area == doctest::Approx(g->dx[1 - f.axis]));
  }
  CHECK(g->faces.size() > 0);
}

TEST_CASE("small 2d ball interior count") {
  // radius 1, 5 nodes per axis: lattice at -1,-0.5,0,0.5,1; strictly-inside
  // nodes are the 3x3 inner block (corner distance sqrt(0.5) < 1).
  auto g = build_grid(DomainSpec::ball_domain(2, Vec3{0, 0, 0}, 1.0), 5);
  CHECK(g->n_interior() == 9);
}

TEST_CASE("summation by parts on a staircase mask") {
  auto g = build_grid(DomainSpec::ball_domain(2, Vec3{0, 0, 0}, 1.0), 23);
  auto f = real_field_from(g, [](const Vec3& x) {
    return std::sin(1.3 * x[0]) * std::cos(0.7 * x[1]) + 0.2 * x[0] * x[1];
  });
  auto w = real_field_from(g, [](const Vec3& x) {
    return std::cos(2.1 * x[0] + 0.4 * x[1]) + x[1] * x[1];
  });
  RealField lf = laplacian(f);
  RealField mlf = lf;
  for (auto& x : mlf.v) x = -x;
  const double lhs = l2_inner(mlf, w);
  const double rhs = dirichlet_grad_inner(f, w);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(dirichlet_energy(f) == doctest::Approx(dirichlet_grad_inner(f, f)).epsilon(1e-14));
}

TEST_CASE("sine modes are exact stencil eigenvectors") {
  const int n = 41;
  auto g = build_grid(DomainSpec::box_domain(1, Vec3{0, 0, 0}, Vec3{1, 0, 0}), n);
  const double dx = g->dx[0];
  for (int k : {1, 2, 5}) {
    auto u = real_field_from(
        g, [k](const Vec3& x) { return std::sin(k * M_PI * (x[0] + 1.0) / 2.0); });
    const double mu = (2.0 - 2.0 * std::cos(k * M_PI * dx / 2.0)) / (dx * dx);
    RealField lu = laplacian(u);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      worst = std::max(worst, std::abs(lu[i] + mu * u[i]));
    CHECK(worst <= 1e-10 * mu);
  }
}

TEST_CASE("boundary flux of the first sine mode") {
  // u = sin(pi (x+1)/2) on (-1,1): |du/dn| = pi/2 at both endpoints.
  auto g = build_grid(DomainSpec::box_domain(1, Vec3{0, 0, 0}, Vec3{1, 0, 0}), 401);
  auto u =
      real_field_from(g, [](const Vec3& x) { return std::sin(M_PI * (x[0] + 1.0) / 2.0); });
  auto flux = boundary_flux_samples(u);
  REQUIRE(flux.size() == 2);
  const double gn2_exact = M_PI * M_PI / 4.0;
  for (const auto& s : flux) CHECK(s.gn2 == doctest::Approx(gn2_exact).epsilon(1e-3));
}

TEST_CASE("node-matched inflation grids") {
  const double h = 0.5, alpha = 1.0;
  auto d = DomainSpec::box_domain(1, Vec3{0, 0, 0}, Vec3{1, 0, 0});
  auto di = inflate_domain(d, h, alpha);
  auto g = build_grid(d, 101);
  auto gi = build_grid(di, 101);
  REQUIRE(g->n_interior() == gi->n_interior());
  const double s = std::pow(h, -beta_of(alpha));
  for (std::size_t i = 0; i < g->n_interior(); ++i) {
    const double x = g->coord(static_cast<int32_t>(i))[0];
    const double y = gi->coord(static_cast<int32_t>(i))[0];
    CHECK(y == doctest::Approx(x * s).epsilon(1e-13));
  }
}

TEST_CASE("field io round trips") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "nlse_io_test";
  fs::create_directories(dir);
  auto d = DomainSpec::box_domain(2, Vec3{0.2, -0.1, 0}, Vec3{1.0, 0.8, 0});
  auto g = build_grid(d, 17);
  auto u = real_field_from(g, [](const Vec3& x) { return std::sin(x[0]) + x[1] * x[1]; });

  SUBCASE("binary real") {
    const auto path = (dir / "u.bin").string();
    write_field_bin(path, u);
    RealField back = read_field_bin_real(path, d);
    REQUIRE(back.size() == u.size());
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(back[i] == u[i]);  // bit-exact
    CHECK_THROWS_AS(read_field_bin_complex(path, d), std::runtime_error);
    auto other = DomainSpec::ball_domain(2, Vec3{0, 0, 0}, 1.0);
    CHECK_THROWS_AS(read_field_bin_real(path, other), std::runtime_error);
  }

  SUBCASE("binary complex") {
    const auto path = (dir / "psi.bin").string();
    auto psi = complex_field_from(
        g, [](const Vec3& x) { return cplx(std::cos(x[0]), std::sin(x[1])); });
    write_field_bin(path, psi);
    ComplexField back = read_field_bin_complex(path, d);
    REQUIRE(back.size() == psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) CHECK(back[i] == psi[i]);
  }

  SUBCASE("csv format") {
    const auto path = (dir / "u.csv").string();
    write_field_csv(path, u);
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "x,y,value");
    std::string first;
    std::getline(is, first);
    CHECK(first.find(',') != std::string::npos);
    CHECK(first.find('.') != std::string::npos);  // '.' decimal separator
  }

  fs::remove_all(dir);
}

TEST_CASE("g17 formatting round trips doubles") {
  for (double x : {1.0 / 3.0, 2.718281828459045e-7, -1.9990175793783653e+2}) {
    const std::string s = fmt_g17(x);
    CHECK(std::stod(s) == x);
  }
}
