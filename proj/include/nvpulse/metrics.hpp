#pragma once

// Power and energy bookkeeping for pi-pulses. Energy is measured as
// integral Omega(t)^2 dt (rad^2/s), proportional to the microwave energy
// delivered per pulse since power scales with Omega^2.

#include <span>

#include "nvpulse/shaper.hpp"

namespace nvpulse::metrics {

struct EnergyReport {
  double peak_rabi = 0.0;         // rad/s
  double reference_rabi = 0.0;    // top-hat reference, rad/s
  double peak_power_ratio = 0.0;  // (reference_rabi / peak_rabi)^2
  double pulse_energy = 0.0;      // rad^2/s
  double reference_energy = 0.0;  // pi * reference_rabi
  double energy_ratio = 0.0;      // reference_energy / pulse_energy
  // Energy relative to a constant-amplitude pulse of the same duration
  // (pi^2 / t_pi); >= 1 by Cauchy-Schwarz.
  double energy_premium = 0.0;
};

// Integral of Omega^2 over a piecewise-constant envelope with cell width `step`.
double pulse_energy(std::span<const double> samples, double step);
// pi * Omega: constant Omega over t_pi = pi / Omega.
double tophat_energy(double rabi);
double peak_power_ratio(double reference_rabi, double peak_rabi);
double peak_power_ratio(double reference_rabi, const shaper::ShapedPulse& pulse);

EnergyReport energy_report(const shaper::ShapedPulse& pulse, double reference_rabi);

}  // namespace nvpulse::metrics
