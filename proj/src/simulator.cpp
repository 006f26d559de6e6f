#include "nvpulse/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace nvpulse::sim {

using quantum::Complex;
using quantum::Matrix;
using quantum::Operator;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitarityLimit = 1e-8;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// exp(-i H dt) for a 2x2 Hermitian H = m 1 + n.sigma; also reports the spread 2|n|.
Operator expm_2x2(const Matrix& h, double dt, double& spread) {
  const double m = 0.5 * (h(0, 0).real() + h(1, 1).real());
  const double nz = 0.5 * (h(0, 0).real() - h(1, 1).real());
  const double nx = h(1, 0).real();
  const double ny = h(1, 0).imag();
  const double n = std::sqrt(nx * nx + ny * ny + nz * nz);
  spread = 2.0 * n;
  const double c = std::cos(n * dt);
  // sin(n dt) / n, finite as n -> 0
  const double s = n * dt < 1e-8 ? dt : std::sin(n * dt) / n;
  Matrix traceless = h;
  traceless(0, 0) -= m;
  traceless(1, 1) -= m;
  Matrix u = Matrix::Identity(2, 2) * c - Complex(0.0, s) * traceless;
  u *= std::polar(1.0, -m * dt);
  return Operator(std::move(u));
}

Operator power(Operator base, long long exponent) {
  Operator result = Operator::identity(base.dim());
  while (exponent > 0) {
    if (exponent & 1) result = base * result;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

void check_unitarity(double err) {
  if (err > kUnitarityLimit) {
    throw Error(fmt::format("sequence propagator lost unitarity: ||U^dagger U - 1|| = {:.3e}", err));
  }
}

// Pulse and free propagators for one NV-nucleus system. Nothing here depends on
// the modulation period, so a scan builds them once.
class NuclearPropagators {
 public:
  NuclearPropagators(const model::SpinSystem& sys, const PulseShape& shape, const std::vector<double>& phases)
      : h0_(model::free_hamiltonian(sys)), free_eig_(quantum::eigen_hermitian(h0_)) {
    for (double phi : phases) {
      if (std::find(phases_.begin(), phases_.end(), phi) != phases_.end()) continue;
      phases_.push_back(phi);
      pulses_.push_back(build_pulse(sys, shape, phi));
    }
  }

  Operator free(double duration) const {
    if (duration <= 0.0) return Operator::identity(h0_.dim());
    return quantum::expm_from_eigen(free_eig_, duration);
  }

  const Operator& pulse(double phase) const {
    const auto it = std::find(phases_.begin(), phases_.end(), phase);
    return pulses_.at(static_cast<std::size_t>(it - phases_.begin()));
  }

  Operator sequence(const Schedule& s) const {
    const double d = s.pulse_duration();
    const Operator edge = free(0.25 * s.period() - 0.5 * d);
    const Operator middle = free(0.5 * s.period() - d);
    auto period_op = [&](int first_pulse) {
      return edge * pulse(s.phase_of(first_pulse + 1)) * middle * pulse(s.phase_of(first_pulse)) * edge;
    };
    const int pattern = static_cast<int>(s.phases().size());
    const int cycle = std::lcm(pattern, 2) / 2;  // periods per phase cycle
    Operator cycle_op = Operator::identity(h0_.dim());
    for (int n = 0; n < std::min(cycle, s.periods()); ++n) cycle_op = period_op(2 * n) * cycle_op;
    if (s.periods() <= cycle) return cycle_op;
    const int full = s.periods() / cycle;
    const int rest = s.periods() % cycle;
    Operator rest_op = Operator::identity(h0_.dim());
    for (int n = 0; n < rest; ++n) rest_op = period_op(2 * n) * rest_op;
    return rest_op * power(cycle_op, full);
  }

 private:
  Operator build_pulse(const model::SpinSystem& sys, const PulseShape& shape, double phase) const {
    const Operator drive = model::drive_operator(sys, phase);
    return std::visit(
        Overloaded{
            [&](const Instantaneous&) { return quantum::expm_hermitian(drive, kPi); },
            [&](const TopHat& t) { return quantum::expm_hermitian(h0_ + t.rabi * drive, kPi / t.rabi); },
            [&](const Shaped& sp) {
              // The envelope is piecewise constant, so each cell is one exact exponential.
              Operator u = Operator::identity(h0_.dim());
              for (double omega : sp.pulse->samples()) {
                u = quantum::expm_hermitian(h0_ + omega * drive, sp.pulse->step()) * u;
              }
              return quantum::nearest_unitary(u);
            }},
        shape);
  }

  Operator h0_;
  quantum::HermitianEigen free_eig_;
  std::vector<double> phases_;
  std::vector<Operator> pulses_;
};

Operator classical_free(const model::ClassicalSignal& sig, double a, double b) {
  const double phi = 0.5 * sig.integrated_amplitude(a, b);
  Matrix u = Matrix::Zero(2, 2);
  u(0, 0) = std::polar(1.0, -phi);
  u(1, 1) = std::polar(1.0, phi);
  return Operator(std::move(u));
}

Operator classical_pulse(const model::ClassicalSignal& sig, const PulseShape& shape, const PulseEvent& ev) {
  if (std::holds_alternative<Instantaneous>(shape)) {
    return quantum::expm_hermitian(0.5 * model::sigma_phi(ev.phase), kPi);
  }
  const double rate = std::max(sig.peak_amplitude() + peak_rabi(shape), sig.max_frequency());
  auto steps = static_cast<std::size_t>(std::ceil(ev.duration * rate / (0.8 * kMaxStepPhase)));
  if (const auto* sp = std::get_if<Shaped>(&shape)) {
    // Align steps with envelope cells so every midpoint sits inside one cell.
    const std::size_t cells = sp->pulse->samples().size();
    steps = cells * std::max<std::size_t>(1, (steps + cells - 1) / cells);
  }
  const double start = ev.start;
  model::Drive drive{[&shape, start](double t) { return envelope(shape, t - start); }, ev.phase};
  return propagate(model::build_classical_hamiltonian(sig, drive), {ev.start, ev.start + ev.duration, steps});
}

void parallel_for(int n, unsigned threads, const std::function<void(int)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

SpectrumResult scan_metadata(const ScanSpec& spec) {
  if (spec.points < 3) throw std::invalid_argument("a spectrum scan needs at least 3 points");
  if (!(spec.center > 0.0) || spec.span < 0.0) throw std::invalid_argument("scan centre must be positive");
  if (spec.phases.empty()) throw std::invalid_argument("scan needs a phase pattern");
  SpectrumResult r;
  r.harmonic = spec.harmonic;
  r.final_time = 2.0 * kPi * spec.harmonic / spec.center * spec.periods;
  r.pulse_count = 2 * spec.periods;
  r.shape = describe(spec.shape);
  r.peak_rabi = peak_rabi(spec.shape);
  r.energy_per_pulse = pulse_energy(spec.shape);
  r.reference = spec.reference > 0.0 ? spec.reference : spec.center;
  r.rows.resize(static_cast<std::size_t>(spec.points));
  return r;
}

template <class RunPoint>
void fill_rows(SpectrumResult& r, const ScanSpec& spec, RunPoint&& run_point) {
  const auto freqs = scan_frequencies(spec.center, spec.span, spec.points);
  std::vector<double> unitarity(freqs.size(), 0.0);
  parallel_for(spec.points, spec.threads ? spec.threads : default_threads(), [&](int i) {
    const double nu = freqs[static_cast<std::size_t>(i)];
    const double period = 2.0 * kPi * spec.harmonic / nu;
    const Schedule s = Schedule::periodic(period, spec.periods, spec.shape, spec.phases);
    const RunOutcome out = run_point(s);
    auto& row = r.rows[static_cast<std::size_t>(i)];
    row.harmonic_frequency = nu;
    row.omega_m = nu / spec.harmonic;
    row.detuning = nu - r.reference;
    row.sigma_x = out.sigma_x;
    unitarity[static_cast<std::size_t>(i)] = out.unitarity_error;
  });
  r.max_unitarity_error = *std::max_element(unitarity.begin(), unitarity.end());
}

RunOutcome measure(const Operator& u, std::size_t nuclei) {
  const double err = u.unitarity_error();
  check_unitarity(err);
  const quantum::State rho = initial_state(nuclei).evolved(u);
  return {quantum::expectation(rho, coherence_observable(nuclei)), err};
}

}  // namespace

double pulse_duration(const PulseShape& shape) {
  return std::visit(Overloaded{[](const Instantaneous&) { return 0.0; },
                               [](const TopHat& t) { return kPi / t.rabi; },
                               [](const Shaped& s) { return s.pulse->duration(); }},
                    shape);
}

double peak_rabi(const PulseShape& shape) {
  return std::visit(Overloaded{[](const Instantaneous&) { return 0.0; },
                               [](const TopHat& t) { return std::abs(t.rabi); },
                               [](const Shaped& s) { return s.pulse->peak_rabi(); }},
                    shape);
}

double pulse_energy(const PulseShape& shape) {
  return std::visit(Overloaded{[](const Instantaneous&) { return 0.0; },
                               [](const TopHat& t) { return kPi * std::abs(t.rabi); },
                               [](const Shaped& s) {
                                 double e = 0.0;
                                 for (double v : s.pulse->samples()) e += v * v;
                                 return e * s.pulse->step();
                               }},
                    shape);
}

double envelope(const PulseShape& shape, double u) {
  return std::visit(Overloaded{[](const Instantaneous&) { return 0.0; },
                               [u](const TopHat& t) { return (u >= 0.0 && u < kPi / t.rabi) ? t.rabi : 0.0; },
                               [u](const Shaped& s) { return s.pulse->envelope(u); }},
                    shape);
}

std::string describe(const PulseShape& shape) {
  return std::visit(
      Overloaded{[](const Instantaneous&) { return std::string("instantaneous"); },
                 [](const TopHat& t) { return fmt::format("tophat(rabi={:.6g} MHz)", t.rabi / (2.0 * kPi) * 1e-6); },
                 [](const Shaped& s) {
                   const auto& p = s.pulse->params();
                   return fmt::format("shaped(alpha={}, gamma={:.6g}, beta={:.9g}{})", p.alpha, p.gamma, p.beta,
                                      s.pulse->refined() ? ", refined" : "");
                 }},
      shape);
}

Schedule Schedule::periodic(double period, int periods, PulseShape shape, std::vector<double> phases) {
  if (const auto* t = std::get_if<TopHat>(&shape); t && !(t->rabi > 0.0)) {
    throw std::invalid_argument("top-hat Rabi frequency must be positive");
  }
  if (const auto* s = std::get_if<Shaped>(&shape); s && !s->pulse) {
    throw std::invalid_argument("shaped pulse is missing");
  }
  modulation::SequencePlan{period, sim::pulse_duration(shape), periods, phases}.validate();
  Schedule s;
  s.period_ = period;
  s.periods_ = periods;
  s.shape_ = std::move(shape);
  s.phases_ = std::move(phases);
  return s;
}

PulseEvent Schedule::event(int pulse) const {
  const double d = pulse_duration();
  const double centre = (pulse / 2) * period_ + (pulse % 2 == 0 ? 0.25 : 0.75) * period_;
  return {centre - 0.5 * d, d, phase_of(pulse)};
}

std::vector<PulseEvent> Schedule::events() const {
  std::vector<PulseEvent> out;
  out.reserve(static_cast<std::size_t>(pulse_count()));
  for (int j = 0; j < pulse_count(); ++j) out.push_back(event(j));
  return out;
}

Operator propagate(const quantum::TimeDependentOperator& h, const TimeGrid& grid, double max_phase) {
  if (grid.steps == 0) throw std::invalid_argument("time grid needs at least one step");
  const double dt = grid.step();
  Operator u = Operator::identity(h.dim);
  for (std::size_t i = 0; i < grid.steps; ++i) {
    const double t_mid = grid.start + (static_cast<double>(i) + 0.5) * dt;
    const Operator hm = h(t_mid);
    double spread = 0.0;
    Operator step;
    if (hm.dim() == 2) {
      if (!hm.is_hermitian()) throw NonHermitianInput("H(t) is not Hermitian");
      step = expm_2x2(hm.matrix(), dt, spread);
    } else {
      const auto eig = quantum::eigen_hermitian(hm);
      spread = eig.spread();
      step = quantum::expm_from_eigen(eig, dt);
    }
    if (spread * std::abs(dt) > max_phase) {
      throw StepTooCoarse(fmt::format("step {:.3e} s rotates by {:.3e} rad at t = {:.6e} s (limit {})", dt,
                                      spread * std::abs(dt), t_mid, max_phase));
    }
    u = step * u;
  }
  return u;
}

quantum::State evolve(const quantum::TimeDependentOperator& h, const quantum::State& rho0, const TimeGrid& grid,
                      double max_phase) {
  return rho0.evolved(propagate(h, grid, max_phase));
}

quantum::State initial_state(std::size_t nuclei) {
  const Operator nv = 0.5 * (Operator::identity(2) + quantum::sigma_x());
  const std::size_t nuclear_dim = std::size_t{1} << nuclei;
  return quantum::State(
      quantum::tensor(nv, Operator::identity(nuclear_dim) * Complex(1.0 / static_cast<double>(nuclear_dim), 0.0)));
}

Operator coherence_observable(std::size_t nuclei) {
  return quantum::tensor(quantum::sigma_x(), Operator::identity(std::size_t{1} << nuclei));
}

Operator pulse_propagator(const PulseShape& shape, double phase) {
  const Operator half = 0.5 * model::sigma_phi(phase);
  return std::visit(
      Overloaded{[&](const Instantaneous&) { return quantum::expm_hermitian(half, kPi); },
                 [&](const TopHat& t) { return quantum::expm_hermitian(t.rabi * half, kPi / t.rabi); },
                 [&](const Shaped& s) {
                   const auto& pulse = *s.pulse;
                   quantum::TimeDependentOperator h{2, [&](double t) { return pulse.envelope(t) * half; }};
                   return propagate(h, {0.0, pulse.duration(), pulse.samples().size()});
                 }},
      shape);
}

Operator sequence_propagator(const model::SpinSystem& sys, const Schedule& schedule) {
  return NuclearPropagators(sys, schedule.shape(), schedule.phases()).sequence(schedule);
}

Operator sequence_propagator(const model::ClassicalSignal& sig, const Schedule& schedule) {
  Operator u = Operator::identity(2);
  double t = 0.0;
  for (int j = 0; j < schedule.pulse_count(); ++j) {
    const PulseEvent ev = schedule.event(j);
    u = classical_free(sig, t, ev.start) * u;
    u = classical_pulse(sig, schedule.shape(), ev) * u;
    t = ev.start + ev.duration;
  }
  return classical_free(sig, t, schedule.final_time()) * u;
}

RunOutcome run_sequence(const model::SpinSystem& sys, const Schedule& schedule) {
  return measure(sequence_propagator(sys, schedule), sys.size());
}

RunOutcome run_sequence(const model::ClassicalSignal& sig, const Schedule& schedule) {
  return measure(sequence_propagator(sig, schedule), 0);
}

double predict_signal(double f_k, double coupling, double t_f, Target target) {
  return target == Target::Nuclear ? std::cos(f_k * coupling * t_f / 4.0) : std::cos(f_k * coupling * t_f / 2.0);
}

std::vector<double> scan_frequencies(double center, double span, int points) {
  if (points < 1) throw std::invalid_argument("scan needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double x = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1) - 0.5;
    out[static_cast<std::size_t>(i)] = center + span * x;
  }
  return out;
}

SpectrumResult scan_spectrum(const model::SpinSystem& sys, const ScanSpec& spec) {
  sys.check_harmonic(spec.harmonic);
  SpectrumResult r = scan_metadata(spec);
  r.field = sys.field();
  const NuclearPropagators props(sys, spec.shape, spec.phases);
  fill_rows(r, spec, [&](const Schedule& s) { return measure(props.sequence(s), sys.size()); });
  return r;
}

SpectrumResult scan_spectrum(const model::ClassicalSignal& sig, const ScanSpec& spec) {
  SpectrumResult r = scan_metadata(spec);
  fill_rows(r, spec, [&](const Schedule& s) { return run_sequence(sig, s); });
  return r;
}

unsigned default_threads() {
  if (const char* env = std::getenv("NVPULSE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace nvpulse::sim
