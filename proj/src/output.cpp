#include "nvpulse/output.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "nvpulse/error.hpp"

namespace nvpulse::io {

using nlohmann::ordered_json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double to_mhz(double w) { return w / kTwoPi / 1e6; }

// JSON numbers rounded to 12 significant digits so sidecars are as stable as the CSVs.
double rounded(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(format_number(v));
}

}  // namespace

std::string format_number(double v) {
  const std::string s = fmt::format("{:.12g}", v);
  return s == "-0" ? "0" : s;
}

std::string spectrum_csv(const sim::SpectrumResult& r) {
  std::string out = "omega_m_MHz,detuning_kHz,sigma_x\n";
  for (const auto& p : r.rows) {
    out += fmt::format("{},{},{}\n", format_number(to_mhz(p.omega_m)), format_number(p.detuning / kTwoPi / 1e3),
                       format_number(p.sigma_x));
  }
  return out;
}

ordered_json spectrum_metadata(const sim::SpectrumResult& r) {
  ordered_json j;
  j["harmonic"] = r.harmonic;
  j["points"] = r.rows.size();
  j["final_time_us"] = rounded(r.final_time * 1e6);
  j["pulse_count"] = r.pulse_count;
  j["pulse_shape"] = r.shape;
  j["field_T"] = rounded(r.field);
  j["peak_rabi_MHz"] = rounded(to_mhz(r.peak_rabi));
  j["energy_per_pulse_rad2_per_s"] = rounded(r.energy_per_pulse);
  j["reference_MHz"] = rounded(to_mhz(r.reference));
  j["max_unitarity_error"] = rounded(r.max_unitarity_error);
  return j;
}

std::string coefficients_csv(const std::vector<CoefficientRow>& rows) {
  std::string out = "l,alpha,f_l,abs_f_l\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{}\n", r.l, format_number(r.alpha), format_number(r.f), format_number(std::abs(r.f)));
  }
  return out;
}

std::string envelope_csv(const shaper::ShapedPulse& pulse) {
  std::string out = "t_us,F_z,rabi_MHz\n";
  const auto& s = pulse.samples();
  const double h = pulse.step();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double u = (static_cast<double>(i) + 0.5) * h;
    out += fmt::format("{},{},{}\n", format_number(u * 1e6), format_number(pulse.F(u)), format_number(to_mhz(s[i])));
  }
  return out;
}

ordered_json shape_summary(const shaper::ShapedPulse& pulse) {
  const auto& p = pulse.params();
  ordered_json j;
  j["alpha"] = p.alpha;
  j["gamma"] = rounded(p.gamma);
  j["harmonic"] = pulse.harmonic();
  j["period_us"] = rounded(pulse.design_period() * 1e6);
  j["duration_us"] = rounded(p.duration * 1e6);
  j["beta"] = rounded(p.beta);
  j["beta_refined"] = pulse.refined();
  j["peak_rabi_MHz"] = rounded(to_mhz(pulse.peak_rabi()));
  j["pulse_area"] = rounded(pulse.area());
  j["overlap_residual"] = rounded(shaper::verify_overlap(p, pulse.harmonic(), pulse.design_period()));
  j["max_abs_F"] = rounded(pulse.max_abs_F());
  j["monotone"] = pulse.monotone();
  j["cells"] = pulse.samples().size();
  return j;
}

ordered_json energy_json(const metrics::EnergyReport& r) {
  ordered_json j;
  j["peak_rabi_MHz"] = rounded(to_mhz(r.peak_rabi));
  j["reference_rabi_MHz"] = rounded(to_mhz(r.reference_rabi));
  j["peak_power_ratio"] = rounded(r.peak_power_ratio);
  j["pulse_energy_rad2_per_s"] = rounded(r.pulse_energy);
  j["reference_energy_rad2_per_s"] = rounded(r.reference_energy);
  j["energy_ratio"] = rounded(r.energy_ratio);
  j["energy_premium"] = rounded(r.energy_premium);
  return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

void emit_results(const sim::SpectrumResult& r, const OutputPaths& paths) {
  if (!paths.csv.empty()) write_file(paths.csv, spectrum_csv(r));
  if (!paths.json.empty()) write_file(paths.json, dump(spectrum_metadata(r)));
}

}  // namespace nvpulse::io
