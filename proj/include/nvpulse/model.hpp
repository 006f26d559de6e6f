#pragma once

// Physical model of an NV qubit coupled to nuclear spins or to a classical
// oscillating field. All frequencies are angular (rad/s), times in seconds,
// fields in tesla.
//
// NV qubit basis ordering is (|1>, |0>) so that sigma_z = |1><1| - |0><0| is the
// usual diag(1, -1); with that ordering the rotating-frame coupling is
// +1/2 sigma_z A.I and the drive (Omega/2)(|1><0| e^{i phi} + h.c.) is
// (Omega/2) sigma_phi with sigma_phi = cos(phi) sigma_x - sin(phi) sigma_y.

#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvpulse/quantum.hpp"

namespace nvpulse::model {

using Vec3 = Eigen::Vector3d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PhysicalConstants {
  double zero_field_splitting = kTwoPi * 2.87e9;   // D, rad/s
  double gamma_e = -kTwoPi * 28.024e9;             // rad/s/T
  double mu0 = 4.0e-7 * std::numbers::pi;          // T m / A
  double hbar = 1.054571817e-34;                   // J s
};

// Gyromagnetic ratios (rad/s/T) by species label: "H" (1H), "C13", "F19".
// Throws std::invalid_argument for unknown labels.
double gyromagnetic_ratio(const std::string& species);

inline constexpr double kGammaProton = kTwoPi * 42.577478518e6;

// Dipolar hyperfine vector for a nucleus at `r` (metres, NV at the origin,
// z along the NV axis):
//   A = (mu0 hbar gamma_e gamma_n / (4 pi |r|^3)) [z - 3 (z.r) r / |r|^2].
// Throws ZeroDistance for |r| == 0.
Vec3 hyperfine_from_position(const Vec3& r, double gamma_n, const PhysicalConstants& pc = {});

// Nuclear precession frame at field B_z in the rotating frame of the NV.
struct NuclearFrame {
  double larmor = 0.0;       // omega_L = gamma_n B_z
  Vec3 precession;           // (-A_x/2, -A_y/2, omega_L - A_z/2)
  double resonance = 0.0;    // omega_n = |precession|
  Vec3 axis;                 // precession / omega_n
  double perpendicular = 0.0;  // A_perp = |A - (A.axis) axis| = |axis x A|
};

NuclearFrame nuclear_frame(double b_z, double gamma_n, const Vec3& hyperfine);

struct Nucleus {
  double gamma_n = kGammaProton;
  Vec3 hyperfine = Vec3::Zero();  // rad/s
};

class SpinSystem {
 public:
  // Throws std::invalid_argument for B_z == 0 or an empty nucleus list.
  SpinSystem(double b_z, std::vector<Nucleus> nuclei, double validity_ratio = 10.0);

  double field() const noexcept { return b_z_; }
  const std::vector<Nucleus>& nuclei() const noexcept { return nuclei_; }
  const NuclearFrame& frame(std::size_t i) const { return frames_.at(i); }
  std::size_t size() const noexcept { return nuclei_.size(); }
  std::size_t dim() const noexcept { return std::size_t{2} << nuclei_.size(); }
  double validity_ratio() const noexcept { return validity_ratio_; }

  // |gamma_n B_z| >= R k |A_perp| for every nucleus; throws ValidityViolation.
  void check_harmonic(int k) const;
  bool harmonic_valid(int k) const noexcept;

 private:
  double b_z_;
  std::vector<Nucleus> nuclei_;
  std::vector<NuclearFrame> frames_;
  double validity_ratio_;
};

// Envelope and phase of the NV drive. `rabi(t)` is the signed Rabi frequency,
// zero outside pulse windows.
struct Drive {
  std::function<double(double)> rabi;
  double phase = 0.0;
};

// NV qubit operators.
quantum::Operator sigma_phi(double phase);
quantum::Operator sigma_phi_perp(double phase);

// Static part of the rotating-frame Hamiltonian:
//   sum_i [ -omega_n,i axis_i . I_i + 1/2 sigma_z A_i . I_i ].
quantum::Operator free_hamiltonian(const SpinSystem& sys);
// (1/2) sigma_phi (x) identity; multiply by Omega(t) to get the drive term.
quantum::Operator drive_operator(const SpinSystem& sys, double phase);

quantum::TimeDependentOperator build_sim_hamiltonian(const SpinSystem& sys,
                                                     std::optional<Drive> drive = std::nullopt);

// (f_k / 4) A_perp sigma_z (x) I_x for nucleus `which`, identity on other nuclei.
// Throws ValidityViolation when the harmonic-validity check fails.
quantum::Operator build_effective_hamiltonian(const SpinSystem& sys, double f_k, int k,
                                              std::size_t which = 0);

struct Tone {
  double amplitude = 0.0;  // Omega_s, rad/s
  double frequency = 0.0;  // omega_s, rad/s
};

class ClassicalSignal {
 public:
  // Throws std::invalid_argument for an empty list or non-positive frequencies.
  explicit ClassicalSignal(std::vector<Tone> tones);
  // Every tone shares Omega_s = gamma_e B_s.
  static ClassicalSignal from_field(double b_s, const std::vector<double>& frequencies,
                                    const PhysicalConstants& pc = {});

  const std::vector<Tone>& tones() const noexcept { return tones_; }
  // sum_i Omega_i cos(omega_i t)
  double amplitude_at(double t) const;
  // integral_{a}^{b} sum_i Omega_i cos(omega_i t) dt
  double integrated_amplitude(double a, double b) const;
  double max_frequency() const;
  double peak_amplitude() const;

 private:
  std::vector<Tone> tones_;
};

quantum::TimeDependentOperator build_classical_hamiltonian(const ClassicalSignal& sig,
                                                           std::optional<Drive> drive = std::nullopt);

// Resonant k-th harmonic reduction: (Omega_s / 4) f_k sigma_z.
quantum::Operator classical_effective_hamiltonian(double omega_s, double f_k);

}  // namespace nvpulse::model
