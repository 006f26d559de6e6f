#include "nvpulse/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace nvpulse::model {

using quantum::Complex;
using quantum::Operator;

double gyromagnetic_ratio(const std::string& species) {
  if (species == "H" || species == "1H") return kGammaProton;
  if (species == "C13" || species == "13C") return kTwoPi * 10.7084e6;
  if (species == "F19" || species == "19F") return kTwoPi * 40.078e6;
  throw std::invalid_argument("unknown nuclear species '" + species + "'");
}

Vec3 hyperfine_from_position(const Vec3& r, double gamma_n, const PhysicalConstants& pc) {
  const double d = r.norm();
  if (!(d > 0.0)) throw ZeroDistance("nucleus placed at the NV position");
  const double prefactor = pc.mu0 * pc.hbar * pc.gamma_e * gamma_n / (4.0 * std::numbers::pi * d * d * d);
  const Vec3 z = Vec3::UnitZ();
  return prefactor * (z - 3.0 * r.z() * r / (d * d));
}

NuclearFrame nuclear_frame(double b_z, double gamma_n, const Vec3& hyperfine) {
  NuclearFrame f;
  f.larmor = gamma_n * b_z;
  f.precession = Vec3(-0.5 * hyperfine.x(), -0.5 * hyperfine.y(), f.larmor - 0.5 * hyperfine.z());
  f.resonance = f.precession.norm();
  if (!(f.resonance > 0.0)) throw std::invalid_argument("nuclear precession vector vanishes");
  f.axis = f.precession / f.resonance;
  f.perpendicular = f.axis.cross(hyperfine).norm();
  return f;
}

SpinSystem::SpinSystem(double b_z, std::vector<Nucleus> nuclei, double validity_ratio)
    : b_z_(b_z), nuclei_(std::move(nuclei)), validity_ratio_(validity_ratio) {
  if (b_z_ == 0.0 || !std::isfinite(b_z_)) throw std::invalid_argument("B_z must be non-zero and finite");
  if (nuclei_.empty()) throw std::invalid_argument("spin system needs at least one nucleus");
  if (nuclei_.size() > 3) throw std::invalid_argument("at most three nuclei are supported");
  if (!(validity_ratio_ > 0.0)) throw std::invalid_argument("validity ratio must be positive");
  frames_.reserve(nuclei_.size());
  for (const auto& n : nuclei_) frames_.push_back(nuclear_frame(b_z_, n.gamma_n, n.hyperfine));
}

bool SpinSystem::harmonic_valid(int k) const noexcept {
  for (std::size_t i = 0; i < nuclei_.size(); ++i) {
    if (std::abs(nuclei_[i].gamma_n * b_z_) < validity_ratio_ * k * std::abs(frames_[i].perpendicular)) {
      return false;
    }
  }
  return true;
}

void SpinSystem::check_harmonic(int k) const {
  for (std::size_t i = 0; i < nuclei_.size(); ++i) {
    const double lhs = std::abs(nuclei_[i].gamma_n * b_z_);
    const double rhs = validity_ratio_ * k * std::abs(frames_[i].perpendicular);
    if (lhs < rhs) {
      throw ValidityViolation(fmt::format(
          "nucleus {}: |gamma_n B_z| = 2pi x {:.6g} Hz is below {} x k x A_perp = 2pi x {:.6g} Hz (k = {})", i,
          lhs / kTwoPi, validity_ratio_, rhs / kTwoPi, k));
    }
  }
}

Operator sigma_phi(double phase) {
  quantum::Matrix m(2, 2);
  m << 0.0, std::polar(1.0, phase), std::polar(1.0, -phase), 0.0;
  return Operator(std::move(m));
}

Operator sigma_phi_perp(double phase) {
  const Complex i(0.0, 1.0);
  quantum::Matrix m(2, 2);
  m << 0.0, -i * std::polar(1.0, phase), i * std::polar(1.0, -phase), 0.0;
  return Operator(std::move(m));
}

Operator free_hamiltonian(const SpinSystem& sys) {
  const std::size_t slots = sys.size() + 1;
  Operator h = Operator::zero(sys.dim());
  const Operator sz = quantum::embed(quantum::sigma_z(), 0, slots);
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const Vec3& a = sys.nuclei()[i].hyperfine;
    const Vec3 w = sys.frame(i).precession;
    const Operator ix = quantum::embed(quantum::spin_x(), i + 1, slots);
    const Operator iy = quantum::embed(quantum::spin_y(), i + 1, slots);
    const Operator iz = quantum::embed(quantum::spin_z(), i + 1, slots);
    h -= w.x() * ix + w.y() * iy + w.z() * iz;
    h += 0.5 * (sz * (a.x() * ix + a.y() * iy + a.z() * iz));
  }
  return h;
}

Operator drive_operator(const SpinSystem& sys, double phase) {
  return 0.5 * quantum::embed(sigma_phi(phase), 0, sys.size() + 1);
}

quantum::TimeDependentOperator build_sim_hamiltonian(const SpinSystem& sys, std::optional<Drive> drive) {
  Operator h0 = free_hamiltonian(sys);
  if (!drive) {
    return {sys.dim(), [h0](double) { return h0; }};
  }
  Operator d = drive_operator(sys, drive->phase);
  return {sys.dim(), [h0, d, rabi = drive->rabi](double t) {
            const double omega = rabi(t);
            return omega == 0.0 ? h0 : h0 + omega * d;
          }};
}

Operator build_effective_hamiltonian(const SpinSystem& sys, double f_k, int k, std::size_t which) {
  sys.check_harmonic(k);
  const std::size_t slots = sys.size() + 1;
  const double a_perp = sys.frame(which).perpendicular;
  return (0.25 * f_k * a_perp) *
         (quantum::embed(quantum::sigma_z(), 0, slots) * quantum::embed(quantum::spin_x(), which + 1, slots));
}

ClassicalSignal::ClassicalSignal(std::vector<Tone> tones) : tones_(std::move(tones)) {
  if (tones_.empty()) throw std::invalid_argument("classical signal needs at least one tone");
  for (const auto& t : tones_) {
    if (!(t.frequency > 0.0)) throw std::invalid_argument("tone frequencies must be positive");
    if (!std::isfinite(t.amplitude)) throw std::invalid_argument("tone amplitudes must be finite");
  }
}

ClassicalSignal ClassicalSignal::from_field(double b_s, const std::vector<double>& frequencies,
                                            const PhysicalConstants& pc) {
  std::vector<Tone> tones;
  for (double w : frequencies) tones.push_back({pc.gamma_e * b_s, w});
  return ClassicalSignal(std::move(tones));
}

double ClassicalSignal::amplitude_at(double t) const {
  double s = 0.0;
  for (const auto& tone : tones_) s += tone.amplitude * std::cos(tone.frequency * t);
  return s;
}

double ClassicalSignal::integrated_amplitude(double a, double b) const {
  double s = 0.0;
  for (const auto& tone : tones_) {
    s += tone.amplitude * (std::sin(tone.frequency * b) - std::sin(tone.frequency * a)) / tone.frequency;
  }
  return s;
}

double ClassicalSignal::max_frequency() const {
  double m = 0.0;
  for (const auto& t : tones_) m = std::max(m, t.frequency);
  return m;
}

double ClassicalSignal::peak_amplitude() const {
  double m = 0.0;
  for (const auto& t : tones_) m += std::abs(t.amplitude);
  return m;
}

quantum::TimeDependentOperator build_classical_hamiltonian(const ClassicalSignal& sig, std::optional<Drive> drive) {
  const Operator half_sz = 0.5 * quantum::sigma_z();
  if (!drive) {
    return {2, [sig, half_sz](double t) { return sig.amplitude_at(t) * half_sz; }};
  }
  const Operator d = 0.5 * sigma_phi(drive->phase);
  return {2, [sig, half_sz, d, rabi = drive->rabi](double t) {
            return sig.amplitude_at(t) * half_sz + rabi(t) * d;
          }};
}

Operator classical_effective_hamiltonian(double omega_s, double f_k) {
  return (0.25 * omega_s * f_k) * quantum::sigma_z();
}

}  // namespace nvpulse::model
