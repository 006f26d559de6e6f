#pragma once

// Modulation functions F_z(t) of the symmetric two-pulse block and their
// Fourier coefficients f_l = (2/T) int_0^T F_z(s) cos(l w_m s) ds.
//
// The elementary block has pulses centred at T/4 and 3T/4. F_z is +1 before
// the first pulse, -1 between the pulses, +1 after the second pulse; inside a
// window the first pulse follows a profile running +1 -> -1 and the second
// pulse its negative (-1 -> +1), so F_z is continuous for finite pulses.

#include <functional>
#include <string>
#include <vector>

namespace nvpulse::modulation {

// Sequence timing: N periods of length T, two pulses of length t_pi per period.
struct SequencePlan {
  double period = 0.0;          // T, s
  double pulse_duration = 0.0;  // t_pi, s (0 for instantaneous pulses)
  int periods = 1;              // N
  std::vector<double> phases;   // drive phase per pulse, cycled

  // Throws InvalidGeometry when windows would overlap (t_pi > T/2) or
  // parameters are non-positive.
  void validate() const;

  double final_time() const { return periods * period; }
  int pulse_count() const { return 2 * periods; }
  double pulse_phase(int j) const;
  // Window edges t_1..t_4 of the first period.
  double t1() const { return 0.25 * period - 0.5 * pulse_duration; }
  double t2() const { return 0.25 * period + 0.5 * pulse_duration; }
  double t3() const { return 0.75 * period - 0.5 * pulse_duration; }
  double t4() const { return 0.75 * period + 0.5 * pulse_duration; }
  // alpha = t_pi l / T
  double alpha(int l) const { return pulse_duration * l / period; }
};

// Parses a phase pattern such as "XYXYYXYX" (X -> 0, Y -> pi/2).
// Throws std::invalid_argument on other characters.
std::vector<double> parse_phase_pattern(const std::string& pattern);
inline const std::string kXY8 = "XYXYYXYX";

class ModulationFunction {
 public:
  // In-pulse profile on u in [0, t_pi], running from +1 to -1.
  using Profile = std::function<double(double)>;

  static ModulationFunction instantaneous(double period);
  // Constant Rabi frequency pi / t_pi: profile cos(pi u / t_pi).
  static ModulationFunction tophat(double period, double pulse_duration);
  static ModulationFunction custom(double period, double pulse_duration, Profile profile);

  double period() const noexcept { return period_; }
  double pulse_duration() const noexcept { return duration_; }
  bool has_windows() const noexcept { return duration_ > 0.0; }
  // Profile of the first pulse; requires has_windows().
  double profile(double u) const { return profile_(u); }

  // F_z(t), periodic with period T.
  double operator()(double t) const;

 private:
  ModulationFunction(double period, double duration, Profile profile);

  double period_;
  double duration_;
  Profile profile_;
};

struct QuadratureOptions {
  // Gauss-Legendre panels per period of cos(l w_m s) inside a window; the
  // starting panel count is refined by doubling until successive estimates
  // agree to `tolerance`.
  int panels_per_oscillation = 64;
  double tolerance = 1e-12;
  int max_doublings = 12;
};

// int_a^b f(u) cos(omega u) du by composite 20-point Gauss-Legendre with a
// fixed number of panels.
double cosine_overlap(const std::function<double(double)>& f, double a, double b, double omega, int panels);

// Same, refined by panel doubling. Throws QuadratureNotConverged.
double cosine_overlap_adaptive(const std::function<double(double)>& f, double a, double b, double omega,
                               int initial_panels, const QuadratureOptions& opt = {});

// 4 (-1)^((l-1)/2) / (pi l) for odd l, 0 for even l. Throws std::invalid_argument for l < 1.
double f_l_instantaneous(int l);

// Top-hat coefficient
//   f_l(alpha) = 4 (-1)^((l+1)/2) cos(alpha pi) / ((4 alpha^2 - 1) l pi),
// with the removable singularity at alpha = 1/2 replaced by its limit.
// Returns 0 for even l. Throws std::invalid_argument for l < 1 or alpha < 0.
double f_l_tophat(int l, double alpha);

// Numerical Fourier coefficient of F over one period. Constant segments are
// integrated in closed form; pulse windows by adaptive composite quadrature.
double f_l_numeric(const ModulationFunction& F, int l, const QuadratureOptions& opt = {});

// alpha = gamma_n B_z / (2 Omega_max): pulse length in target-harmonic periods
// reachable at peak Rabi frequency Omega_max.
double required_alpha(double b_z, double gamma_n, double omega_max);

}  // namespace nvpulse::modulation
