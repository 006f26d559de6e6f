#pragma once

// Time evolution of the NV sensor through a pulse sequence, modulation
// frequency scans and closed-form signal predictions.

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "nvpulse/model.hpp"
#include "nvpulse/quantum.hpp"
#include "nvpulse/shaper.hpp"

namespace nvpulse::sim {

struct Instantaneous {};
struct TopHat {
  double rabi = 0.0;  // rad/s; t_pi = pi / rabi
};
struct Shaped {
  std::shared_ptr<const shaper::ShapedPulse> pulse;
};
using PulseShape = std::variant<Instantaneous, TopHat, Shaped>;

double pulse_duration(const PulseShape& shape);
// Peak |Omega|; 0 for instantaneous pulses.
double peak_rabi(const PulseShape& shape);
// integral Omega^2 dt of one pulse; 0 for instantaneous pulses.
double pulse_energy(const PulseShape& shape);
// Envelope value at offset u from the pulse start.
double envelope(const PulseShape& shape, double u);
std::string describe(const PulseShape& shape);

struct PulseEvent {
  double start = 0.0;
  double duration = 0.0;
  double phase = 0.0;
};

// Pulses centred at T/4 and 3T/4 of every period, phases cycled from `phases`.
class Schedule {
 public:
  // Throws InvalidGeometry for overlapping windows or an empty phase list.
  static Schedule periodic(double period, int periods, PulseShape shape, std::vector<double> phases);

  double period() const noexcept { return period_; }
  int periods() const noexcept { return periods_; }
  const PulseShape& shape() const noexcept { return shape_; }
  const std::vector<double>& phases() const noexcept { return phases_; }
  double final_time() const noexcept { return period_ * periods_; }
  int pulse_count() const noexcept { return 2 * periods_; }
  double pulse_duration() const { return sim::pulse_duration(shape_); }
  double phase_of(int pulse) const { return phases_[static_cast<std::size_t>(pulse) % phases_.size()]; }
  PulseEvent event(int pulse) const;
  std::vector<PulseEvent> events() const;

 private:
  double period_ = 0.0;
  int periods_ = 0;
  PulseShape shape_;
  std::vector<double> phases_;
};

struct TimeGrid {
  double start = 0.0;
  double stop = 0.0;
  std::size_t steps = 1;
  double step() const { return (stop - start) / static_cast<double>(steps); }
};

// Largest allowed rotation per step, h * (spectral spread of H).
inline constexpr double kMaxStepPhase = 0.05;

// Time-ordered product of midpoint-sampled propagators exp(-i H(t_mid) h).
// Throws StepTooCoarse when h * spread(H(t_mid)) exceeds max_phase.
quantum::Operator propagate(const quantum::TimeDependentOperator& h, const TimeGrid& grid,
                            double max_phase = kMaxStepPhase);
quantum::State evolve(const quantum::TimeDependentOperator& h, const quantum::State& rho0, const TimeGrid& grid,
                      double max_phase = kMaxStepPhase);

// 1/2 (1 + sigma_x) for the NV, maximally mixed nuclei.
quantum::State initial_state(std::size_t nuclei);
// sigma_x on the NV, identity on the nuclei.
quantum::Operator coherence_observable(std::size_t nuclei);

// Drive-only propagator of a single pulse on the NV qubit, exp(-i pi sigma_phi / 2)
// for a perfect pulse.
quantum::Operator pulse_propagator(const PulseShape& shape, double phase);

// Propagator of a whole sequence.
quantum::Operator sequence_propagator(const model::SpinSystem& sys, const Schedule& schedule);
quantum::Operator sequence_propagator(const model::ClassicalSignal& sig, const Schedule& schedule);

struct RunOutcome {
  double sigma_x = 0.0;
  double unitarity_error = 0.0;
};

// <sigma_x>(t_f) starting from initial_state. Throws Error when the total
// propagator violates unitarity by more than 1e-8.
RunOutcome run_sequence(const model::SpinSystem& sys, const Schedule& schedule);
RunOutcome run_sequence(const model::ClassicalSignal& sig, const Schedule& schedule);

enum class Target { Nuclear, Classical };

// Resonant closed forms: cos(f_k A_perp t_f / 4) for a nucleus,
// cos(f_k Omega_s t_f / 2) for a classical tone.
double predict_signal(double f_k, double coupling, double t_f, Target target);

struct ScanSpec {
  int harmonic = 1;                 // k
  int periods = 1;                  // N
  std::vector<double> phases;       // phase pattern
  PulseShape shape;
  double center = 0.0;              // centre of the scanned k w_m, rad/s
  double span = 0.0;                // full width of the scan, rad/s
  int points = 3;
  double reference = 0.0;           // detuning origin; 0 selects `center`
  unsigned threads = 0;             // 0: NVPULSE_THREADS or hardware concurrency
};

struct ScanPoint {
  double harmonic_frequency = 0.0;  // k w_m, rad/s
  double omega_m = 0.0;             // rad/s
  double detuning = 0.0;            // k w_m - reference, rad/s
  double sigma_x = 0.0;
};

struct SpectrumResult {
  int harmonic = 1;
  std::vector<ScanPoint> rows;
  double final_time = 0.0;          // at the scan centre
  int pulse_count = 0;
  std::string shape;
  double field = 0.0;               // B_z (0 for classical targets)
  double peak_rabi = 0.0;
  double energy_per_pulse = 0.0;
  double reference = 0.0;
  double max_unitarity_error = 0.0;
};

// Uniform grid of `points` values over [center - span/2, center + span/2].
std::vector<double> scan_frequencies(double center, double span, int points);

// Throws std::invalid_argument for fewer than 3 points.
SpectrumResult scan_spectrum(const model::SpinSystem& sys, const ScanSpec& spec);
SpectrumResult scan_spectrum(const model::ClassicalSignal& sig, const ScanSpec& spec);

// Worker count for parallel scans: NVPULSE_THREADS if set, else hardware concurrency.
unsigned default_threads();

}  // namespace nvpulse::sim
