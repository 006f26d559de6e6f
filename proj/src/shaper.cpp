#include "nvpulse/shaper.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "nvpulse/error.hpp"

namespace nvpulse::shaper {

namespace {

constexpr double kPi = std::numbers::pi;

double gaussian(double u, const PulseParams& p) {
  const double c = p.width();
  const double x = u - 0.5 * p.duration;
  return std::exp(-x * x / (2.0 * c * c));
}

// (1 - F, 1 + F) without cancellation near the window edges.
std::pair<double, double> distance_to_poles(double u, const PulseParams& p) {
  const double half = 0.5 * kPi * u / p.duration;
  const double corr = p.beta * gaussian(u, p) * std::sin(2.0 * kPi * p.alpha * u / p.duration);
  const double s = std::sin(half);
  const double c = std::cos(half);
  return {2.0 * s * s + corr, 2.0 * c * c - corr};
}

int overlap_panels(int alpha) { return std::max(8, 64 * alpha); }

double window_start(const PulseParams& p, double period) { return 0.25 * period - 0.5 * p.duration; }

}  // namespace

double ansatz_F(double u, const PulseParams& p) {
  return std::cos(kPi * u / p.duration) -
         p.beta * gaussian(u, p) * std::sin(2.0 * kPi * p.alpha * u / p.duration);
}

double ansatz_dF(double u, const PulseParams& p) {
  const double c = p.width();
  const double k = 2.0 * kPi * p.alpha / p.duration;
  const double g = gaussian(u, p);
  const double dg = -(u - 0.5 * p.duration) / (c * c) * g;
  return -kPi / p.duration * std::sin(kPi * u / p.duration) -
         p.beta * (dg * std::sin(k * u) + g * k * std::cos(k * u));
}

double beta_analytic(int alpha, double gamma) {
  if (alpha < 1) throw std::invalid_argument("alpha must be a positive integer");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  const double a = alpha;
  const double num = 4.0 * std::sqrt(2.0) * gamma * a / ((4.0 * a * a - 1.0) * std::pow(kPi, 1.5));
  return num / (-std::expm1(-8.0 * a * a * kPi * kPi / (gamma * gamma)));
}

OverlapIntegrals overlap_integrals(int alpha, double gamma, double duration) {
  const double a = alpha;
  OverlapIntegrals out;
  out.cosine = duration * (1.0 / ((2.0 * a + 1.0) * kPi) + 1.0 / ((2.0 * a - 1.0) * kPi));
  out.gaussian = duration / gamma * std::sqrt(0.5 * kPi) * -std::expm1(-8.0 * a * a * kPi * kPi / (gamma * gamma));
  return out;
}

double verify_overlap(const PulseParams& p, int l, double period, int panels) {
  const double t1 = window_start(p, period);
  const double w = l * 2.0 * kPi / period;
  auto f = [&](double u) { return ansatz_F(u - t1, p); };
  return modulation::cosine_overlap(f, t1, t1 + p.duration, w, panels) / p.duration;
}

double verify_overlap(const PulseParams& p, int l, double period) {
  const double t1 = window_start(p, period);
  const double w = l * 2.0 * kPi / period;
  auto f = [&](double u) { return ansatz_F(u - t1, p); };
  modulation::QuadratureOptions opt;
  opt.tolerance = 1e-12;
  return modulation::cosine_overlap_adaptive(f, t1, t1 + p.duration, w, overlap_panels(p.alpha), opt) /
         p.duration;
}

double refine_beta(const PulseParams& p, int l, double period) {
  const double t1 = window_start(p, period);
  const double w = l * 2.0 * kPi / period;
  modulation::QuadratureOptions opt;
  opt.tolerance = 1e-12;
  const int panels = overlap_panels(p.alpha);
  auto cosine_part = [&](double u) { return std::cos(kPi * (u - t1) / p.duration); };
  auto gauss_part = [&](double u) {
    return gaussian(u - t1, p) * std::sin(2.0 * kPi * p.alpha * (u - t1) / p.duration);
  };
  const double j0 = modulation::cosine_overlap_adaptive(cosine_part, t1, t1 + p.duration, w, panels, opt);
  const double j1 = modulation::cosine_overlap_adaptive(gauss_part, t1, t1 + p.duration, w, panels, opt);
  if (j1 == 0.0) throw std::domain_error("refine_beta: Gaussian overlap vanishes");
  return j0 / j1;
}

ShapedPulse ShapedPulse::design(int alpha, double gamma, int l, double period, DesignOptions opt) {
  if (alpha < 1) throw std::invalid_argument("alpha must be a positive integer");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (l < 1) throw std::invalid_argument("harmonic index must be >= 1");
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");

  ShapedPulse s;
  s.harmonic_ = l;
  s.period_ = period;
  s.params_.alpha = alpha;
  s.params_.gamma = gamma;
  s.params_.duration = alpha * period / l;
  if (s.params_.duration > 0.5 * period * (1.0 + 1e-12)) {
    throw InvalidGeometry(fmt::format("alpha = {} exceeds (l - 1)/2 = {} for l = {}: pulses would overlap", alpha,
                                      (l - 1) / 2, l));
  }
  s.params_.beta = beta_analytic(alpha, gamma);
  if (opt.refine) {
    s.params_.beta = refine_beta(s.params_, l, period);
    s.refined_ = true;
  }

  const std::size_t cells = opt.samples ? opt.samples : std::max<std::size_t>(4096, 256 * std::size_t(alpha));
  const double tp = s.params_.duration;

  // Range scan on a grid four times finer than the envelope.
  const std::size_t scan = 4 * cells;
  double max_f = 0.0;
  double worst_excess = 0.0;
  for (std::size_t i = 0; i <= scan; ++i) {
    const double u = tp * static_cast<double>(i) / static_cast<double>(scan);
    const auto [below, above] = distance_to_poles(u, s.params_);
    max_f = std::max(max_f, std::abs(ansatz_F(u, s.params_)));
    worst_excess = std::min({worst_excess, below, above});
    if (i == 0 || i == scan) continue;
    if (std::min(below, above) < 1e-14 && std::min(below, above) >= -1e-13 &&
        std::abs(ansatz_dF(u, s.params_)) * tp > 1e-6) {
      throw SingularEndpoint(fmt::format("F reaches +-1 inside the window at u/t_pi = {:.6f}", u / tp));
    }
  }
  s.max_abs_f_ = max_f;
  if (worst_excess < -1e-13) {
    throw FOutOfRange(fmt::format("max |F| = {:.9f} > 1 for alpha = {}, gamma = {}, beta = {:.6g}; retune gamma",
                                  max_f, alpha, gamma, s.params_.beta));
  }

  s.step_ = tp / static_cast<double>(cells);
  s.samples_.resize(cells);
  double prev = 0.0;  // theta(0)
  for (std::size_t i = 0; i < cells; ++i) {
    const double next = i + 1 == cells ? s.theta(tp) : s.theta(s.step_ * static_cast<double>(i + 1));
    const double v = (next - prev) / s.step_;
    s.samples_[i] = v;
    s.peak_ = std::max(s.peak_, std::abs(v));
    if (v < 0.0) s.monotone_ = false;
    prev = next;
  }
  return s;
}

ShapedPulse ShapedPulse::design_for_frequency(int alpha, double gamma, int l, double omega_target,
                                              DesignOptions opt) {
  if (!(omega_target > 0.0)) throw std::invalid_argument("target frequency must be positive");
  return design(alpha, gamma, l, 2.0 * kPi * l / omega_target, opt);
}

double ShapedPulse::theta(double u) const {
  const auto [below, above] = distance_to_poles(u, params_);
  return 2.0 * std::atan2(std::sqrt(std::max(0.0, 0.5 * below)), std::sqrt(std::max(0.0, 0.5 * above)));
}

double ShapedPulse::rabi(double u) const {
  const auto [below, above] = distance_to_poles(u, params_);
  return -ansatz_dF(u, params_) / std::sqrt(below * above);
}

double ShapedPulse::envelope(double u) const {
  if (u < 0.0 || u >= params_.duration) return 0.0;
  const auto i = std::min(samples_.size() - 1, static_cast<std::size_t>(u / step_));
  return samples_[i];
}

double ShapedPulse::area() const {
  double a = 0.0;
  for (double v : samples_) a += v * step_;
  return a;
}

std::vector<ShapedPulse::Control> ShapedPulse::controls(double phase) const {
  std::vector<Control> out;
  out.reserve(samples_.size());
  for (double v : samples_) out.push_back({std::abs(v), v < 0.0 ? phase + kPi : phase});
  return out;
}

modulation::ModulationFunction ShapedPulse::modulation(double period) const {
  return modulation::ModulationFunction::custom(period, params_.duration,
                                                [p = params_](double u) { return ansatz_F(u, p); });
}

}  // namespace nvpulse::shaper
