#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nvpulse/error.hpp"
#include "nvpulse/model.hpp"
#include "nvpulse/modulation.hpp"
#include "oracles.hpp"

using namespace nvpulse;
using namespace nvpulse::modulation;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("instantaneous coefficients") {
  CHECK(f_l_instantaneous(1) == doctest::Approx(4.0 / kPi));
  CHECK(f_l_instantaneous(3) == doctest::Approx(-4.0 / (3 * kPi)));
  CHECK(f_l_instantaneous(27) == doctest::Approx(-4.0 / (27 * kPi)));
  CHECK(f_l_instantaneous(27) == doctest::Approx(-0.04716).epsilon(1e-4));
  for (int l = 2; l <= 40; l += 2) CHECK(f_l_instantaneous(l) == 0.0);
  CHECK_THROWS_AS(f_l_instantaneous(0), std::invalid_argument);
}

TEST_CASE("sign of f_1 is fixed by direct quadrature") {
  const auto F = ModulationFunction::instantaneous(1.0);
  CHECK(oracle::fourier_dense(F, 1.0, 1, 200000) == doctest::Approx(4.0 / kPi).epsilon(1e-6));
}

TEST_CASE("top-hat coefficients") {
  CHECK(f_l_tophat(27, 1.0) == doctest::Approx(-0.01572).epsilon(1e-3));
  for (int l : {1, 3, 27, 99}) CHECK(f_l_tophat(l, 0.0) == doctest::Approx(f_l_instantaneous(l)).epsilon(1e-15));
  // continuous through the removable point alpha = 1/2
  const double at = f_l_tophat(27, 0.5);
  CHECK(at == doctest::Approx(-1.0 / 27.0).epsilon(1e-14));
  CHECK(f_l_tophat(27, 0.5 + 1e-7) == doctest::Approx(at).epsilon(1e-6));
  CHECK(f_l_tophat(27, 0.5 - 1e-7) == doctest::Approx(at).epsilon(1e-6));
  CHECK(f_l_tophat(27, 0.5 + 2e-3) == doctest::Approx(f_l_tophat(27, 0.5 + 0.9e-3)).epsilon(1e-2));
  CHECK(f_l_tophat(28, 1.3) == 0.0);
  CHECK_THROWS_AS(f_l_tophat(27, -0.1), std::invalid_argument);
  // decay ~ 1/alpha^2 at integer alpha
  CHECK(std::abs(f_l_tophat(27, 4.0) / f_l_tophat(27, 2.0)) == doctest::Approx(15.0 / 63.0));
}

TEST_CASE("numeric coefficients match the closed form and a dense oracle") {
  const double T = 2.5e-6;
  for (int l : {1, 3, 25, 27, 29}) {
    for (double alpha : {0.0, 0.3, 0.5, 1.0, 2.0}) {
      if (2 * alpha > l) continue;
      const auto F = ModulationFunction::tophat(T, alpha * T / l);
      const double closed = f_l_tophat(l, alpha);
      CHECK(f_l_numeric(F, l) == doctest::Approx(closed).epsilon(1e-9));
      CHECK(oracle::fourier_dense(F, T, l, 400000) == doctest::Approx(closed).epsilon(1e-4));
    }
  }
}

TEST_CASE("even harmonics vanish") {
  const double T = 1.0;
  for (int l = 2; l <= 30; l += 2) {
    CHECK(std::abs(f_l_numeric(ModulationFunction::instantaneous(T), l)) < 1e-12);
    CHECK(std::abs(f_l_numeric(ModulationFunction::tophat(T, 0.17), l)) < 1e-12);
    const auto custom = ModulationFunction::custom(T, 0.2, [](double u) { return std::cos(kPi * u / 0.2) + 0.05 * std::sin(2 * kPi * u / 0.2); });
    CHECK(std::abs(f_l_numeric(custom, l)) < 1e-12);
  }
}

TEST_CASE("Parseval: sum f_l^2 / 2 equals the mean of F^2") {
  // F is even in t, so only cosine terms appear.
  double sum = 0.0;
  const int L = 20001;
  for (int l = 1; l <= L; l += 2) sum += 0.5 * std::pow(f_l_instantaneous(l), 2);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));

  // Top-hat with t_pi / T = r: mean F^2 = 1 - r. Coefficients decay as l^-3.
  const double r = 0.1;
  sum = 0.0;
  for (int l = 1; l <= 4001; l += 2) sum += 0.5 * std::pow(f_l_tophat(l, r * l), 2);
  CHECK(sum == doctest::Approx(1.0 - r).epsilon(1e-6));
}

TEST_CASE("modulation function values") {
  const double T = 1.0, tp = 0.1;
  const auto F = ModulationFunction::tophat(T, tp);
  CHECK(F(0.0) == 1.0);
  CHECK(F(0.5) == -1.0);
  CHECK(F(0.99) == 1.0);
  CHECK(F(0.25) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(F(1.5) == F(0.5));
  CHECK(F(-0.5) == F(0.5));
  // continuity at the window edges
  const double t1 = 0.25 - tp / 2, t2 = 0.25 + tp / 2, t3 = 0.75 - tp / 2, t4 = 0.75 + tp / 2;
  for (double e : {t1, t2, t3, t4}) CHECK(F(e - 1e-12) == doctest::Approx(F(e + 1e-12)).epsilon(1e-9));
  const auto I = ModulationFunction::instantaneous(T);
  CHECK_FALSE(I.has_windows());
  CHECK(I(0.2) == 1.0);
  CHECK(I(0.3) == -1.0);
}

TEST_CASE("sequence geometry") {
  SequencePlan plan{1e-6, 0.5e-6, 10, {0.0}};
  CHECK_NOTHROW(plan.validate());  // touching windows are allowed
  CHECK(plan.final_time() == doctest::Approx(1e-5));
  CHECK(plan.pulse_count() == 20);
  CHECK(plan.t2() == doctest::Approx(plan.t3()));
  plan.pulse_duration = 0.51e-6;
  CHECK_THROWS_AS(plan.validate(), InvalidGeometry);
  CHECK_THROWS_AS((SequencePlan{1e-6, 0.1e-6, 0, {0.0}}.validate()), InvalidGeometry);
  CHECK_THROWS_AS((SequencePlan{1e-6, 0.1e-6, 1, {}}.validate()), InvalidGeometry);
  CHECK_THROWS_AS(ModulationFunction::tophat(1.0, 0.6), InvalidGeometry);
  CHECK(SequencePlan{27.0, 1.0, 1, {0.0}}.alpha(27) == doctest::Approx(1.0));
}

TEST_CASE("phase patterns") {
  const auto p = parse_phase_pattern(kXY8);
  REQUIRE(p.size() == 8);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == doctest::Approx(kPi / 2));
  CHECK(p[4] == doctest::Approx(kPi / 2));
  SequencePlan plan{1.0, 0.0, 4, p};
  CHECK(plan.pulse_phase(9) == p[1]);
  CHECK_THROWS_AS(parse_phase_pattern("XZ"), std::invalid_argument);
  CHECK_THROWS_AS(parse_phase_pattern(""), std::invalid_argument);
}

TEST_CASE("required alpha") {
  const double omega = model::kTwoPi * 10e6;
  CHECK(required_alpha(2.0, model::kGammaProton, omega) == doctest::Approx(4.26).epsilon(2e-3));
  CHECK(required_alpha(5.0, model::kGammaProton, omega) == doctest::Approx(10.65).epsilon(1e-3));
  CHECK_THROWS_AS(required_alpha(0.0, model::kGammaProton, omega), std::invalid_argument);
}

TEST_CASE("adaptive quadrature reports non-convergence") {
  QuadratureOptions opt;
  opt.max_doublings = 1;
  opt.tolerance = 1e-16;
  // 1 panel for 50 oscillations cannot converge in one doubling
  CHECK_THROWS_AS(cosine_overlap_adaptive([](double u) { return std::exp(u); }, 0.0, 1.0, 2 * kPi * 50, 1, opt),
                  QuadratureNotConverged);
  CHECK(cosine_overlap([](double) { return 1.0; }, 0.0, 1.0, 3.0, 8) == doctest::Approx(std::sin(3.0) / 3.0));
}
