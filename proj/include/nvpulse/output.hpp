#pragma once

// CSV and JSON serialisation of results. Numbers use 12 significant digits,
// formatting is locale-independent and lines end in LF.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvpulse/metrics.hpp"
#include "nvpulse/shaper.hpp"
#include "nvpulse/simulator.hpp"

namespace nvpulse::io {

std::string format_number(double v);

// Columns: omega_m_MHz, detuning_kHz, sigma_x.
std::string spectrum_csv(const sim::SpectrumResult& r);
nlohmann::ordered_json spectrum_metadata(const sim::SpectrumResult& r);

struct CoefficientRow {
  int l = 1;
  double alpha = 0.0;
  double f = 0.0;
};
// Columns: l, alpha, f_l, abs_f_l.
std::string coefficients_csv(const std::vector<CoefficientRow>& rows);

// One row per envelope cell (cell midpoints): t_us, F_z, rabi_MHz.
std::string envelope_csv(const shaper::ShapedPulse& pulse);
nlohmann::ordered_json shape_summary(const shaper::ShapedPulse& pulse);

nlohmann::ordered_json energy_json(const metrics::EnergyReport& r);

// Writes `text` verbatim (binary mode, so no CRLF translation).
void write_file(const std::filesystem::path& path, const std::string& text);
std::string dump(const nlohmann::ordered_json& j);

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path json;
};
// Spectrum CSV plus its JSON sidecar; empty paths are skipped.
void emit_results(const sim::SpectrumResult& r, const OutputPaths& paths);

}  // namespace nvpulse::io
