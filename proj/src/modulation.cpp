#include "nvpulse/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "nvpulse/error.hpp"

namespace nvpulse::modulation {

namespace {

constexpr double kPi = std::numbers::pi;

double parity_sign(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

// int_a^b cos(omega s) ds
double cosine_integral(double a, double b, double omega) {
  if (omega == 0.0) return b - a;
  return (std::sin(omega * b) - std::sin(omega * a)) / omega;
}

}  // namespace

void SequencePlan::validate() const {
  if (!(period > 0.0)) throw InvalidGeometry("sequence period must be positive");
  if (pulse_duration < 0.0) throw InvalidGeometry("pulse duration must be non-negative");
  if (periods < 1) throw InvalidGeometry("sequence needs at least one period");
  // Windows of length T/2 touch but do not overlap.
  if (pulse_duration > 0.5 * period * (1.0 + 1e-12)) {
    throw InvalidGeometry(fmt::format("pulse duration {:.6g} s exceeds half the period {:.6g} s", pulse_duration,
                                      0.5 * period));
  }
  if (phases.empty()) throw InvalidGeometry("phase pattern is empty");
}

double SequencePlan::pulse_phase(int j) const {
  return phases.at(static_cast<std::size_t>(j) % phases.size());
}

std::vector<double> parse_phase_pattern(const std::string& pattern) {
  std::vector<double> out;
  for (char c : pattern) {
    switch (c) {
      case 'X':
      case 'x':
        out.push_back(0.0);
        break;
      case 'Y':
      case 'y':
        out.push_back(0.5 * kPi);
        break;
      default:
        throw std::invalid_argument(fmt::format("phase pattern '{}': unexpected character '{}'", pattern, c));
    }
  }
  if (out.empty()) throw std::invalid_argument("phase pattern is empty");
  return out;
}

ModulationFunction::ModulationFunction(double period, double duration, Profile profile)
    : period_(period), duration_(duration), profile_(std::move(profile)) {
  SequencePlan{period, duration, 1, {0.0}}.validate();
}

ModulationFunction ModulationFunction::instantaneous(double period) {
  return ModulationFunction(period, 0.0, [](double) { return 0.0; });
}

ModulationFunction ModulationFunction::tophat(double period, double pulse_duration) {
  if (!(pulse_duration > 0.0)) return instantaneous(period);
  return ModulationFunction(period, pulse_duration,
                            [w = kPi / pulse_duration](double u) { return std::cos(w * u); });
}

ModulationFunction ModulationFunction::custom(double period, double pulse_duration, Profile profile) {
  if (!(pulse_duration > 0.0)) throw InvalidGeometry("custom profile needs a positive pulse duration");
  return ModulationFunction(period, pulse_duration, std::move(profile));
}

double ModulationFunction::operator()(double t) const {
  double s = std::fmod(t, period_);
  if (s < 0.0) s += period_;
  const double t1 = 0.25 * period_ - 0.5 * duration_;
  const double t2 = 0.25 * period_ + 0.5 * duration_;
  const double t3 = 0.75 * period_ - 0.5 * duration_;
  const double t4 = 0.75 * period_ + 0.5 * duration_;
  if (s < t1) return 1.0;
  if (s < t2) return profile_(s - t1);
  if (s < t3) return -1.0;
  if (s < t4) return -profile_(s - t3);
  return 1.0;
}

double cosine_overlap(const std::function<double(double)>& f, double a, double b, double omega, int panels) {
  if (panels < 1) throw std::invalid_argument("cosine_overlap: panel count must be positive");
  const double h = (b - a) / panels;
  auto integrand = [&](double u) { return f(u) * std::cos(omega * u); };
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    sum += boost::math::quadrature::gauss<double, 20>::integrate(integrand, lo, lo + h);
  }
  return sum;
}

double cosine_overlap_adaptive(const std::function<double(double)>& f, double a, double b, double omega,
                               int initial_panels, const QuadratureOptions& opt) {
  int panels = std::max(initial_panels, 1);
  double prev = cosine_overlap(f, a, b, omega, panels);
  for (int i = 0; i < opt.max_doublings; ++i) {
    panels *= 2;
    const double cur = cosine_overlap(f, a, b, omega, panels);
    if (std::abs(cur - prev) <= opt.tolerance * std::abs(b - a)) return cur;
    prev = cur;
  }
  throw QuadratureNotConverged(fmt::format("window quadrature did not converge with {} panels", panels));
}

double f_l_instantaneous(int l) {
  if (l < 1) throw std::invalid_argument("harmonic index must be >= 1");
  if (l % 2 == 0) return 0.0;
  return 4.0 * parity_sign((l - 1) / 2) / (kPi * l);
}

double f_l_tophat(int l, double alpha) {
  if (l < 1) throw std::invalid_argument("harmonic index must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  if (l % 2 == 0) return 0.0;
  // cos(alpha pi) / (4 alpha^2 - 1); near alpha = 1/2 use the equivalent
  // -sin(pi d) / (4 d (1 + d)), d = alpha - 1/2, which has no cancellation.
  const double d = alpha - 0.5;
  double ratio = 0.0;
  if (d == 0.0) {
    ratio = -0.25 * kPi;
  } else if (std::abs(d) < 1e-3) {
    ratio = -std::sin(kPi * d) / (4.0 * d * (1.0 + d));
  } else {
    ratio = std::cos(alpha * kPi) / (4.0 * alpha * alpha - 1.0);
  }
  return 4.0 * parity_sign((l + 1) / 2) * ratio / (l * kPi);
}

double f_l_numeric(const ModulationFunction& F, int l, const QuadratureOptions& opt) {
  if (l < 1) throw std::invalid_argument("harmonic index must be >= 1");
  const double T = F.period();
  const double w = l * 2.0 * kPi / T;
  const double tp = F.pulse_duration();
  const double t1 = 0.25 * T - 0.5 * tp;
  const double t2 = 0.25 * T + 0.5 * tp;
  const double t3 = 0.75 * T - 0.5 * tp;
  const double t4 = 0.75 * T + 0.5 * tp;

  double integral = cosine_integral(0.0, t1, w) - cosine_integral(t2, t3, w) + cosine_integral(t4, T, w);
  if (F.has_windows()) {
    const double alpha = tp * l / T;
    const int panels = std::max(4, static_cast<int>(std::ceil(opt.panels_per_oscillation * alpha)));
    auto first = [&](double s) { return F.profile(s - t1); };
    auto second = [&](double s) { return -F.profile(s - t3); };
    integral += cosine_overlap_adaptive(first, t1, t2, w, panels, opt);
    integral += cosine_overlap_adaptive(second, t3, t4, w, panels, opt);
  }
  return 2.0 / T * integral;
}

double required_alpha(double b_z, double gamma_n, double omega_max) {
  if (!(b_z > 0.0) || !(gamma_n > 0.0) || !(omega_max > 0.0)) {
    throw std::invalid_argument("required_alpha: inputs must be positive");
  }
  return gamma_n * b_z / (2.0 * omega_max);
}

}  // namespace nvpulse::modulation
