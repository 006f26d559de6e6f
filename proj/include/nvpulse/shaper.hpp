#pragma once

// Shaped pi-pulses whose in-pulse modulation function has zero overlap with
// the target harmonic, so the pulse acts like an instantaneous one on that
// harmonic while its Rabi frequency stays low.
//
// In-pulse modulation (u measured from the window start, 0 <= u <= t_pi):
//   F(u) = cos(pi u / t_pi) - beta exp(-(u - t_pi/2)^2 / 2c^2) sin(2 pi alpha u / t_pi)
// with c = t_pi / gamma and integer alpha = t_pi l / T. The drive envelope is
// the derivative of the accumulated rotation angle theta(u) = arccos F(u).

#include <cstddef>
#include <vector>

#include "nvpulse/modulation.hpp"

namespace nvpulse::shaper {

struct PulseParams {
  int alpha = 1;           // pulse length in periods of the target harmonic
  double gamma = 10.0;     // t_pi / c
  double duration = 0.0;   // t_pi, s
  double beta = 0.0;

  double width() const { return duration / gamma; }  // c
};

// Ansatz value and derivative (per second) at offset u from the window start.
double ansatz_F(double u, const PulseParams& p);
double ansatz_dF(double u, const PulseParams& p);

// beta = 4 sqrt(2) gamma alpha / ((4 alpha^2 - 1) pi^{3/2}) / [1 - exp(-8 alpha^2 pi^2 / gamma^2)].
double beta_analytic(int alpha, double gamma);

// Closed forms of the two window integrals that fix beta (pulse window
// centred at T/4, t_pi = alpha T / l, odd l):
//   cosine   = t_pi [1/((2 alpha + 1) pi) + 1/((2 alpha - 1) pi)]
//   gaussian = c sqrt(pi/2) [1 - exp(-8 alpha^2 pi^2 / gamma^2)]
// The ratio cosine/gaussian is beta_analytic.
struct OverlapIntegrals {
  double cosine = 0.0;    // s
  double gaussian = 0.0;  // s
};
OverlapIntegrals overlap_integrals(int alpha, double gamma, double duration);

// Normalised overlap (1/t_pi) int_{t1}^{t1 + t_pi} F(u - t1) cos(l w_m u) du of
// the first pulse window t1 = T/4 - t_pi/2. Adaptive quadrature.
double verify_overlap(const PulseParams& p, int l, double period);
// Same with a fixed number of Gauss-Legendre panels.
double verify_overlap(const PulseParams& p, int l, double period, int panels);

// beta that zeroes the numerically integrated overlap. The overlap is affine in
// beta, so this is a ratio of two window quadratures.
double refine_beta(const PulseParams& p, int l, double period);

struct DesignOptions {
  std::size_t samples = 0;  // envelope cells; 0 selects max(4096, 256 alpha)
  bool refine = false;      // replace analytic beta by refine_beta
};

class ShapedPulse {
 public:
  // t_pi = alpha T / l. Throws std::invalid_argument for alpha < 1, gamma <= 0,
  // InvalidGeometry when t_pi > T/2, FOutOfRange when |F| > 1 somewhere in the
  // window and SingularEndpoint when F touches +-1 inside the window with a
  // non-zero slope.
  static ShapedPulse design(int alpha, double gamma, int l, double period, DesignOptions opt = {});
  // Period chosen so that l w_m equals the target angular frequency.
  static ShapedPulse design_for_frequency(int alpha, double gamma, int l, double omega_target,
                                          DesignOptions opt = {});

  const PulseParams& params() const noexcept { return params_; }
  int harmonic() const noexcept { return harmonic_; }
  double design_period() const noexcept { return period_; }
  double duration() const noexcept { return params_.duration; }
  bool refined() const noexcept { return refined_; }

  double F(double u) const { return ansatz_F(u, params_); }
  // Accumulated rotation angle arccos F(u) in [0, pi], computed without
  // cancellation near F = +-1.
  double theta(double u) const;
  // Signed Rabi frequency -F'(u) / sqrt(1 - F(u)^2) (rad/s), interior points only.
  double rabi(double u) const;

  // Piecewise-constant envelope: cell i covers [i h, (i+1) h) and holds the
  // cell average (theta((i+1)h) - theta(i h)) / h, so the pulse area is
  // exactly the total rotation angle.
  const std::vector<double>& samples() const noexcept { return samples_; }
  double step() const noexcept { return step_; }
  // Envelope value at offset u (cell lookup), 0 outside the window.
  double envelope(double u) const;

  double peak_rabi() const noexcept { return peak_; }
  double area() const;
  double max_abs_F() const noexcept { return max_abs_f_; }
  // True when the envelope never changes sign (F monotone).
  bool monotone() const noexcept { return monotone_; }

  // Emitted control: amplitude |Omega| and phase, with phase + pi on negative lobes.
  struct Control {
    double amplitude = 0.0;
    double phase = 0.0;
  };
  std::vector<Control> controls(double phase) const;

  modulation::ModulationFunction modulation(double period) const;

 private:
  ShapedPulse() = default;

  PulseParams params_;
  int harmonic_ = 1;
  double period_ = 0.0;
  bool refined_ = false;
  std::vector<double> samples_;
  double step_ = 0.0;
  double peak_ = 0.0;
  double max_abs_f_ = 0.0;
  bool monotone_ = true;
};

}  // namespace nvpulse::shaper
