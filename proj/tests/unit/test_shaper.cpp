#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nvpulse/error.hpp"
#include "nvpulse/model.hpp"
#include "nvpulse/modulation.hpp"
#include "nvpulse/shaper.hpp"
#include "oracles.hpp"

using namespace nvpulse;
using namespace nvpulse::shaper;

namespace {

constexpr double kPi = std::numbers::pi;

// Fig. 3 geometry: l = 63 at the proton Larmor frequency of 1.5 T.
double fig3_period() { return 2 * kPi * 63 / (model::kGammaProton * 1.5); }

}  // namespace

TEST_CASE("analytic beta") {
  CHECK(beta_analytic(30, 10.0) == doctest::Approx(0.08468).epsilon(1e-3));
  CHECK(beta_analytic(8, 10.0) == doctest::Approx(0.3187).epsilon(1e-3));
  CHECK_THROWS_AS(beta_analytic(0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(beta_analytic(3, 0.0), std::invalid_argument);
  for (int a : {1, 5, 30}) {
    const auto j = overlap_integrals(a, 10.0, 1e-6);
    CHECK(j.cosine / j.gaussian == doctest::Approx(beta_analytic(a, 10.0)).epsilon(1e-13));
  }
}

TEST_CASE("ansatz derivative matches finite differences") {
  const PulseParams p{30, 10.0, 0.47e-6, beta_analytic(30, 10.0)};
  for (int i = 1; i < 50; ++i) {
    const double u = p.duration * i / 50.0;
    const double h = p.duration * 1e-6;
    const double fd = (ansatz_F(u + h, p) - ansatz_F(u - h, p)) / (2 * h);
    const double an = ansatz_dF(u, p);
    CHECK(std::abs(fd - an) <= 1e-6 * std::max(std::abs(an), kPi / p.duration * 1e-2));
  }
}

TEST_CASE("ansatz runs from +1 to -1") {
  const PulseParams p{8, 10.0, 1e-6, beta_analytic(8, 10.0)};
  CHECK(ansatz_F(0.0, p) == doctest::Approx(1.0));
  CHECK(ansatz_F(p.duration, p) == doctest::Approx(-1.0));
}

TEST_CASE("refined beta agrees with a bisection root of the overlap") {
  const double T = fig3_period();
  PulseParams p{30, 10.0, 30 * T / 63, 0.0};
  const double refined = refine_beta(p, 63, T);
  auto overlap = [&](double b) {
    PulseParams q = p;
    q.beta = b;
    return verify_overlap(q, 63, T, 4096);
  };
  const double bisected = oracle::bisect(overlap, 0.0, 1.0);
  CHECK(refined == doctest::Approx(bisected).epsilon(1e-9));
  p.beta = refined;
  CHECK(std::abs(verify_overlap(p, 63, T)) < 1e-9);
  p.beta = beta_analytic(30, 10.0);
  CHECK(std::abs(verify_overlap(p, 63, T)) < 1e-3);
}

TEST_CASE("Fig. 3 pulse") {
  const auto pulse = ShapedPulse::design(30, 10.0, 63, fig3_period());
  CHECK(pulse.duration() == doctest::Approx(0.4697e-6).epsilon(1e-3));
  CHECK(pulse.theta(0.0) == doctest::Approx(0.0));
  CHECK(pulse.theta(pulse.duration()) == doctest::Approx(kPi));
  CHECK(std::abs(pulse.area() - kPi) < 1e-6);
  CHECK(pulse.peak_rabi() / (2 * kPi * 1e6) == doctest::Approx(6.4).epsilon(0.05));
  CHECK(pulse.max_abs_F() <= 1.0 + 1e-12);
  CHECK(pulse.samples().size() == 7680);
  CHECK(pulse.envelope(-1e-12) == 0.0);
  CHECK(pulse.envelope(pulse.duration()) == 0.0);
  // theta' = rabi in the interior
  for (double x : {0.1, 0.37, 0.5, 0.81}) {
    const double u = x * pulse.duration();
    const double h = pulse.duration() * 1e-6;
    CHECK((pulse.theta(u + h) - pulse.theta(u - h)) / (2 * h) == doctest::Approx(pulse.rabi(u)).epsilon(1e-6));
  }
}

TEST_CASE("Fig. 4 pulse") {
  const double omega = model::kTwoPi * 0.5 * (21.288e6 + 21.295e6);
  const auto pulse = ShapedPulse::design_for_frequency(8, 10.0, 31, omega);
  CHECK(pulse.duration() == doctest::Approx(8 * model::kTwoPi / omega));
  CHECK(pulse.peak_rabi() / (2 * kPi * 1e6) == doctest::Approx(8.12).epsilon(0.05));
  CHECK(std::abs(pulse.area() - kPi) < 1e-6);
}

TEST_CASE("shaped modulation keeps the ideal harmonic coefficient") {
  // f_l(shaped) = (-1)^alpha f_l(0): the window overlap with cos(l w s) vanishes.
  for (auto [alpha, l] : {std::pair{8, 31}, std::pair{30, 63}, std::pair{3, 9}}) {
    const double T = 1.0;
    const auto pulse = ShapedPulse::design(alpha, 10.0, l, T, {0, true});
    const double f = modulation::f_l_numeric(pulse.modulation(T), l);
    const double sign = alpha % 2 ? -1.0 : 1.0;
    CHECK(f == doctest::Approx(sign * modulation::f_l_instantaneous(l)).epsilon(1e-8));
  }
}

TEST_CASE("controls carry phase flips on negative lobes") {
  const auto pulse = ShapedPulse::design(30, 10.0, 63, fig3_period());
  const auto c = pulse.controls(0.3);
  REQUIRE(c.size() == pulse.samples().size());
  bool negative = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].amplitude == doctest::Approx(std::abs(pulse.samples()[i])));
    const bool neg = pulse.samples()[i] < 0;
    negative = negative || neg;
    CHECK(c[i].phase == doctest::Approx(neg ? 0.3 + kPi : 0.3));
  }
  CHECK(negative == !pulse.monotone());
}

TEST_CASE("design errors") {
  CHECK_THROWS_AS(ShapedPulse::design(32, 10.0, 63, 1.0), InvalidGeometry);
  CHECK_NOTHROW(ShapedPulse::design(31, 10.0, 63, 1.0));
  CHECK_THROWS_AS(ShapedPulse::design(0, 10.0, 63, 1.0), std::invalid_argument);
  // alpha = 1 needs beta ~ 3.4: F leaves [-1, 1]
  CHECK_THROWS_AS(ShapedPulse::design(1, 10.0, 27, 1.0), FOutOfRange);
  CHECK_THROWS_AS(ShapedPulse::design_for_frequency(8, 10.0, 31, -1.0), std::invalid_argument);
}

TEST_CASE("cell count is configurable and area stays pi") {
  for (std::size_t cells : {512u, 2048u, 10000u}) {
    const auto pulse = ShapedPulse::design(8, 10.0, 31, 1.0, {cells, false});
    CHECK(pulse.samples().size() == cells);
    CHECK(pulse.area() == doctest::Approx(kPi).epsilon(1e-9));
  }
}
