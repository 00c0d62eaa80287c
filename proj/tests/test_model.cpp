#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "nlse/model.hpp"

using namespace nlse;

namespace {

ModelSpec sin_model(double p = 3.0, double amp = 1.0) {
  ModelSpec m;
  m.w_family = WFamily::sin_power;
  m.p = p;
  m.w_amp = amp;
  m.finalize();
  return m;
}

}  // namespace

TEST_CASE("sin_power values and symmetry") {
  auto m = sin_model();
  CHECK(eval_W(m, 1.0) == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  CHECK(eval_W(m, 0.0) == 0.0);
  for (double s : {0.3, 0.9, 1.4, 2.2}) {
    CHECK(eval_W(m, -s) == eval_W(m, s));              // W even
    CHECK(eval_Wprime(m, -s) == -eval_Wprime(m, s));   // W' odd
    CHECK(eval_Wsecond(m, -s) == eval_Wsecond(m, s));  // W'' even
  }
  auto m2 = sin_model(3.0, 2.5);
  CHECK(eval_W(m2, 1.1) == doctest::Approx(2.5 * eval_W(m, 1.1)).epsilon(1e-15));
  CHECK(std::abs(eval_W(m2, 7.9)) <= 2.5);  // bounded by the amplitude
}

TEST_CASE("derivatives agree with finite differences") {
  auto m = sin_model(2.6, 1.7);
  for (double s : {0.2, 0.8, 1.3, 1.9}) {
    const double e = 1e-6;
    const double fd1 = (eval_W(m, s + e) - eval_W(m, s - e)) / (2 * e);
    const double fd2 = (eval_Wprime(m, s + e) - eval_Wprime(m, s - e)) / (2 * e);
    CHECK(eval_Wprime(m, s) == doctest::Approx(fd1).epsilon(1e-8));
    CHECK(eval_Wsecond(m, s) == doctest::Approx(fd2).epsilon(1e-8));
  }
}

TEST_CASE("nonlinear quotient cutoff") {
  auto m = sin_model();
  CHECK(nonlinear_quotient(m, 0.0) == 0.0);
  CHECK(nonlinear_quotient(m, 0.5 * eps_quot) == 0.0);
  CHECK(nonlinear_quotient(m, -0.5 * eps_quot) == 0.0);
  // Just above the cutoff the analytic reduced form ~ p s^{p-2} is tiny, so
  // the cutoff introduces no jump of significance.
  const double s = 2.0 * eps_quot;
  CHECK(std::abs(nonlinear_quotient(m, s)) <= 3.0 * 2.0 * eps_quot);
  // At ordinary amplitudes it matches W'(s)/s.
  for (double a : {0.4, 1.1, 1.8})
    CHECK(nonlinear_quotient(m, a) == doctest::Approx(eval_Wprime(m, a) / a).epsilon(1e-13));
}

TEST_CASE("negativity witness s0") {
  auto m = sin_model(3.0, 4.0);
  CHECK(m.s0 == doctest::Approx(std::pow(1.5 * M_PI, 1.0 / 3.0)).epsilon(1e-15));
  CHECK(eval_W(m, m.s0) == doctest::Approx(-4.0).epsilon(1e-12));
}

TEST_CASE("potential families") {
  ModelSpec m = sin_model();
  m.v_family = VFamily::quadratic_well;
  m.v2 = 0.7;
  m.v_center = Vec3{0.5, -0.5, 0.0};
  m.finalize();
  const Vec3 x{1.0, 0.5, 0.0};
  CHECK(eval_V(m, x, 2) == doctest::Approx(0.7 * (0.25 + 1.0)).epsilon(1e-15));
  const Vec3 g = grad_V(m, x, 2);
  CHECK(g[0] == doctest::Approx(2 * 0.7 * 0.5).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(2 * 0.7 * 1.0).epsilon(1e-15));

  m.v2 = -0.1;
  CHECK_THROWS_AS(m.finalize(), std::invalid_argument);
}

TEST_CASE("model parameter validation") {
  ModelSpec m;
  m.h = 0.0;
  CHECK_THROWS_AS(m.finalize(), std::invalid_argument);
  m = ModelSpec{};
  m.sigma = -1.0;
  CHECK_THROWS_AS(m.finalize(), std::invalid_argument);
  m = ModelSpec{};
  m.p = 2.0;  // must exceed 2
  CHECK_THROWS_AS(m.finalize(), std::invalid_argument);
  m = ModelSpec{};
  m.w_family = WFamily::table;  // no path
  CHECK_THROWS_AS(m.finalize(), std::invalid_argument);
}

TEST_CASE("structural conditions") {
  SUBCASE("sin_power p=3 in 1d satisfies everything") {
    auto rep = validate_conditions(sin_model(), 1);
    CHECK(rep.core_ok);
    CHECK(rep.localization_ok);
    CHECK(rep.summary().find("[FAIL]") == std::string::npos);
  }
  SUBCASE("p = 7 in 1d fails the localization window only") {
    auto rep = validate_conditions(sin_model(7.0), 1);
    CHECK(rep.core_ok);
    CHECK(!rep.localization_ok);
  }
  SUBCASE("p inside the window in 2d") {
    auto rep = validate_conditions(sin_model(3.5), 2);  // window (2,4)
    CHECK(rep.localization_ok);
    rep = validate_conditions(sin_model(4.5), 2);
    CHECK(!rep.localization_ok);
  }
  SUBCASE("zero family validates core but not localization") {
    ModelSpec m;
    m.w_family = WFamily::zero;
    m.finalize();
    auto rep = validate_conditions(m, 1);
    CHECK(rep.core_ok);
    CHECK(!rep.localization_ok);
  }
}

TEST_CASE("table nonlinearity") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "nlse_model_test";
  fs::create_directories(dir);
  const auto path = (dir / "w.csv").string();

  SUBCASE("cubic table reproduces a smooth W") {
    {
      std::ofstream os(path);
      os << "# s, W\n";
      for (int i = 0; i <= 400; ++i) {
        const double s = 4.0 * i / 400.0;
        os << s << ", " << std::sin(s * s * s) << "\n";
      }
    }
    ModelSpec m;
    m.w_family = WFamily::table;
    m.w_table_path = path;
    m.p = 3.0;
    m.finalize();
    auto ref = sin_model();
    for (double s : {0.31, 0.97, 1.53, 2.11}) {
      CHECK(eval_W(m, s) == doctest::Approx(eval_W(ref, s)).epsilon(1e-6));
      CHECK(eval_W(m, -s) == eval_W(m, s));  // even extension
      CHECK(eval_Wprime(m, s) == doctest::Approx(eval_Wprime(ref, s)).epsilon(1e-3));
    }
  }

  SUBCASE("nonmonotone knots rejected") {
    {
      std::ofstream os(path);
      os << "0 0\n1 0.8\n0.5 0.2\n";
    }
    ModelSpec m;
    m.w_family = WFamily::table;
    m.w_table_path = path;
    CHECK_THROWS_WITH_AS(m.finalize(), doctest::Contains("strictly increasing"),
                         std::runtime_error);
  }

  SUBCASE("too few rows rejected") {
    {
      std::ofstream os(path);
      os << "0 0\n1 0.8\n";
    }
    ModelSpec m;
    m.w_family = WFamily::table;
    m.w_table_path = path;
    CHECK_THROWS_AS(m.finalize(), std::runtime_error);
  }

  SUBCASE("negative abscissa rejected") {
    {
      std::ofstream os(path);
      os << "-1 0.1\n0 0\n1 0.8\n";
    }
    ModelSpec m;
    m.w_family = WFamily::table;
    m.w_table_path = path;
    CHECK_THROWS_AS(m.finalize(), std::runtime_error);
  }

  SUBCASE("missing file") {
    ModelSpec m;
    m.w_family = WFamily::table;
    m.w_table_path = (dir / "absent.csv").string();
    CHECK_THROWS_AS(m.finalize(), std::runtime_error);
  }

  fs::remove_all(dir);
}
