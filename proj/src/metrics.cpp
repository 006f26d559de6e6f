#include "nvpulse/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nvpulse::metrics {

double pulse_energy(std::span<const double> samples, double step) {
  double sum = 0.0;
  for (double v : samples) sum += v * v;
  return sum * step;
}

double tophat_energy(double rabi) { return std::numbers::pi * std::abs(rabi); }

double peak_power_ratio(double reference_rabi, double peak_rabi) {
  if (!(reference_rabi > 0.0) || !(peak_rabi > 0.0)) {
    throw std::invalid_argument("peak_power_ratio: Rabi frequencies must be positive");
  }
  const double r = reference_rabi / peak_rabi;
  return r * r;
}

double peak_power_ratio(double reference_rabi, const shaper::ShapedPulse& pulse) {
  return peak_power_ratio(reference_rabi, pulse.peak_rabi());
}

EnergyReport energy_report(const shaper::ShapedPulse& pulse, double reference_rabi) {
  EnergyReport r;
  r.peak_rabi = pulse.peak_rabi();
  r.reference_rabi = reference_rabi;
  r.peak_power_ratio = peak_power_ratio(reference_rabi, r.peak_rabi);
  r.pulse_energy = pulse_energy(pulse.samples(), pulse.step());
  r.reference_energy = tophat_energy(reference_rabi);
  r.energy_ratio = r.reference_energy / r.pulse_energy;
  const double pi = std::numbers::pi;
  r.energy_premium = r.pulse_energy / (pi * pi / pulse.duration());
  return r;
}

}  // namespace nvpulse::metrics
