#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nvpulse/error.hpp"
#include "nvpulse/model.hpp"
#include "nvpulse/modulation.hpp"
#include "nvpulse/simulator.hpp"
#include "oracles.hpp"

using namespace nvpulse;
using namespace nvpulse::sim;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHz = model::kTwoPi * 1e3;
constexpr double MHz = model::kTwoPi * 1e6;

model::SpinSystem fig1_system() {
  return model::SpinSystem(2.0, {model::Nucleus{model::kGammaProton, model::Vec3(19.12, 55.21, -96.82) * kHz}});
}

std::vector<double> xy8() { return modulation::parse_phase_pattern(modulation::kXY8); }

}  // namespace

TEST_CASE("propagate reproduces a static exponential") {
  std::mt19937 rng(1);
  const quantum::Operator h(oracle::random_hermitian(4, rng));
  const quantum::TimeDependentOperator td{4, [&](double) { return h; }};
  const auto u = propagate(td, {0.0, 1.0, 200});
  CHECK((u.matrix() - oracle::expm_series(h.matrix(), 1.0)).norm() < 1e-11);
  CHECK(u.unitarity_error() < 1e-12);
}

TEST_CASE("propagate rejects coarse steps") {
  const quantum::TimeDependentOperator td{2, [](double) { return 100.0 * quantum::sigma_z(); }};
  CHECK_THROWS_AS(propagate(td, {0.0, 1.0, 100}), StepTooCoarse);
  CHECK_NOTHROW(propagate(td, {0.0, 1.0, 5000}));
}

TEST_CASE("midpoint propagation is second order") {
  const double tau = 1.0;
  const quantum::TimeDependentOperator td{2, [&](double t) {
                                            return (0.5 * 6.0 * std::cos(9.0 * t)) * quantum::sigma_z() +
                                                   (0.5 * 4.0 * std::sin(kPi * t)) * quantum::sigma_y();
                                          }};
  const auto u1 = propagate(td, {0.0, tau, 400});
  const auto u2 = propagate(td, {0.0, tau, 800});
  const auto u3 = propagate(td, {0.0, tau, 1600});
  const double order = std::log2((u1 - u2).norm() / (u2 - u3).norm());
  CHECK(order >= 1.9);
}

TEST_CASE("pulse propagators") {
  const auto ideal = pulse_propagator(Instantaneous{}, 0.0);
  const quantum::Complex mi(0.0, -1.0);
  CHECK((ideal - mi * quantum::sigma_x()).norm() < 1e-14);
  const auto top = pulse_propagator(TopHat{MHz}, kPi / 2);
  CHECK((top - pulse_propagator(Instantaneous{}, kPi / 2)).norm() < 1e-12);
}

TEST_CASE("schedule geometry") {
  const auto s = Schedule::periodic(1e-6, 3, TopHat{10 * MHz}, xy8());
  CHECK(s.pulse_count() == 6);
  CHECK(s.final_time() == doctest::Approx(3e-6));
  const auto e = s.events();
  CHECK(e[0].start + 0.5 * e[0].duration == doctest::Approx(0.25e-6));
  CHECK(e[3].start + 0.5 * e[3].duration == doctest::Approx(1.75e-6));
  CHECK(e[4].phase == doctest::Approx(kPi / 2));
  CHECK_THROWS_AS(Schedule::periodic(1e-6, 3, TopHat{0.9 * MHz}, xy8()), InvalidGeometry);
  CHECK_THROWS_AS(Schedule::periodic(1e-6, 3, TopHat{-1.0}, xy8()), std::invalid_argument);
}

TEST_CASE("initial state and observable") {
  const auto rho = initial_state(2);
  CHECK(rho.density().dim() == 8);
  CHECK(quantum::expectation(rho, coherence_observable(2)) == doctest::Approx(1.0));
}

TEST_CASE("Fig. 1d on resonance matches the closed form") {
  const auto sys = fig1_system();
  const double w = sys.frame(0).resonance;
  const double T = 2 * kPi * 27 / w;
  const auto s = Schedule::periodic(T, 560, Instantaneous{}, xy8());
  const auto out = run_sequence(sys, s);
  const double predicted = predict_signal(modulation::f_l_instantaneous(27), sys.frame(0).perpendicular,
                                          s.final_time(), Target::Nuclear);
  CHECK(out.sigma_x == doctest::Approx(predicted).epsilon(0.02));
  CHECK(out.unitarity_error < 1e-8);
}

TEST_CASE("dip depth of top-hat pulses scales as the squared coefficient ratio") {
  // Small-angle regime: depth ~ (f A_perp t_f / 4)^2 / 2.
  const auto sys = fig1_system();
  const double w = sys.frame(0).resonance;
  const double T = 2 * kPi * 27 / w;
  auto depth = [&](double alpha) {
    const double tp = alpha * T / 27;
    return 1.0 - run_sequence(sys, Schedule::periodic(T, 100, TopHat{kPi / tp}, xy8())).sigma_x;
  };
  const double d1 = depth(0.2), d2 = depth(0.4);
  const double expected = std::pow(modulation::f_l_tophat(27, 0.4) / modulation::f_l_tophat(27, 0.2), 2);
  CHECK(d2 / d1 == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("classical single tone on resonance") {
  const double omega_s = 100 * kHz, w = 21.29 * MHz;
  const model::ClassicalSignal sig({model::Tone{omega_s, w}});
  const double T = 2 * kPi * 31 / w;
  const auto out = run_sequence(sig, Schedule::periodic(T, 20, Instantaneous{}, xy8()));
  const double predicted = predict_signal(modulation::f_l_instantaneous(31), omega_s, 20 * T, Target::Classical);
  CHECK(out.sigma_x == doctest::Approx(predicted).epsilon(0.02));
  // top-hat finite pulses in the classical path use stepped propagation
  const auto top = run_sequence(sig, Schedule::periodic(T, 20, TopHat{20 * MHz}, xy8()));
  CHECK(top.unitarity_error < 1e-10);
  CHECK(top.sigma_x > out.sigma_x);
}

TEST_CASE("scan spectrum") {
  const auto sys = fig1_system();
  ScanSpec spec;
  spec.harmonic = 27;
  spec.periods = 100;
  spec.phases = xy8();
  spec.shape = Instantaneous{};
  spec.center = sys.frame(0).resonance;
  spec.span = 20 * kHz;
  spec.points = 5;
  spec.threads = 1;
  const auto a = scan_spectrum(sys, spec);
  spec.threads = 3;
  const auto b = scan_spectrum(sys, spec);
  REQUIRE(a.rows.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a.rows[i].sigma_x == b.rows[i].sigma_x);  // bit-identical
  CHECK(a.rows[2].detuning == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(a.rows[0].detuning == doctest::Approx(-10 * kHz));
  CHECK(a.rows[2].omega_m == doctest::Approx(spec.center / 27));
  CHECK(a.pulse_count == 200);
  CHECK(a.field == 2.0);
  CHECK(a.rows[2].sigma_x < a.rows[0].sigma_x);  // dip at resonance

  spec.points = 2;
  CHECK_THROWS_AS(scan_spectrum(sys, spec), std::invalid_argument);
  spec.points = 3;
  spec.harmonic = 151;
  CHECK_THROWS_AS(scan_spectrum(sys, spec), ValidityViolation);
}

TEST_CASE("scan frequencies") {
  const auto f = scan_frequencies(10.0, 4.0, 5);
  CHECK(f == std::vector<double>{8.0, 9.0, 10.0, 11.0, 12.0});
}

TEST_CASE("closed-form predictions") {
  CHECK(predict_signal(0.0, 1.0, 1.0, Target::Nuclear) == 1.0);
  CHECK(predict_signal(1.0, 4.0, kPi, Target::Nuclear) == doctest::Approx(-1.0));
  CHECK(predict_signal(1.0, 2.0, kPi, Target::Classical) == doctest::Approx(-1.0));
}

TEST_CASE("pulse metrics by shape") {
  CHECK(pulse_energy(Instantaneous{}) == 0.0);
  CHECK(pulse_energy(TopHat{3.0}) == doctest::Approx(3 * kPi));
  CHECK(pulse_duration(TopHat{2.0}) == doctest::Approx(kPi / 2));
  CHECK(envelope(TopHat{2.0}, 1.0) == 2.0);
  CHECK(envelope(TopHat{2.0}, 2.0) == 0.0);
  CHECK(describe(Instantaneous{}) == "instantaneous");
}
