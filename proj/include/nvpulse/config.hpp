#pragma once

// Run configuration (JSON or TOML). Dimensional values are strings with a
// unit suffix: frequencies "85.2 MHz" (meaning omega / 2 pi; stored as rad/s),
// fields "2 T" / "0.2 G", times "177 us", lengths "1.2 nm".
//
//   system.field             "2 T"
//   system.validity_ratio    10
//   system.nuclei[]          { species = "H", hyperfine = ["19.12 kHz", ...] }
//                            or { species = "H", position = ["1 nm", ...] }
//   system.signal            { field = "0.2 G" | amplitude = "560 kHz",
//                              tones = ["21.288 MHz", "21.295 MHz"] }
//   sequence                 { harmonic = 27, periods = 560 | pulses = 1120,
//                              phases = "XYXYYXYX" }
//   pulse                    { kind = "instantaneous" | "tophat" | "shaped",
//                              rabi = "42 MHz" (tophat),
//                              alpha = 30, gamma = 10, refine = false,
//                              samples = 0 (shaped) }
//   scan                     { center = "...", target = "...", span = "40 kHz",
//                              points = 21 }
//   output                   { csv = "out.csv", json = "out.json" }

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nvpulse/model.hpp"
#include "nvpulse/simulator.hpp"

namespace nvpulse::config {

enum class Dimension { Frequency, Field, Time, Length };

// Parses "<number> <unit>" into SI (angular units for frequencies).
// Throws UnitError naming `field` for a missing or unknown unit.
double parse_quantity(std::string_view text, Dimension dim, const std::string& field = {});
// Inverse of parse_quantity in the canonical unit for `dim`
// (kHz for hyperfine, MHz for other frequencies, T, us, nm).
std::string format_quantity(double value, Dimension dim, std::string_view unit);

enum class ShapeKind { Instantaneous, TopHat, Shaped };

struct NucleusSpec {
  std::string species = "H";
  std::optional<model::Vec3> hyperfine;  // rad/s
  std::optional<model::Vec3> position;   // m
  bool operator==(const NucleusSpec&) const = default;
};

struct SignalSpec {
  std::optional<double> field;      // B_s, T
  std::optional<double> amplitude;  // Omega_s, rad/s
  std::vector<double> tones;        // rad/s
  bool operator==(const SignalSpec&) const = default;
};

struct SystemSpec {
  std::optional<double> field;  // B_z, T
  double validity_ratio = 10.0;
  std::vector<NucleusSpec> nuclei;
  std::optional<SignalSpec> signal;
  bool operator==(const SystemSpec&) const = default;
};

struct SequenceSpec {
  int harmonic = 1;
  int periods = 1;
  std::string phases = "XYXYYXYX";
  bool operator==(const SequenceSpec&) const = default;
};

struct PulseSpec {
  ShapeKind kind = ShapeKind::Instantaneous;
  std::optional<double> rabi;  // rad/s, top-hat only
  int alpha = 0;               // shaped only
  double gamma = 10.0;
  bool refine = false;
  std::size_t samples = 0;
  bool operator==(const PulseSpec&) const = default;
};

struct ScanSpec {
  std::optional<double> center;  // rad/s; default: mean resonance
  std::optional<double> target;  // design frequency of shaped pulses; default: center
  double span = 0.0;             // rad/s
  int points = 21;
  bool operator==(const ScanSpec&) const = default;
};

struct OutputSpec {
  std::string csv;
  std::string json;
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  SystemSpec system;
  SequenceSpec sequence;
  PulseSpec pulse;
  ScanSpec scan;
  OutputSpec output;

  bool classical() const { return system.signal.has_value(); }
  bool operator==(const RunConfig&) const = default;
};

enum class Format { Json, Toml };

// Throws ParseError (with the field path) or UnitError.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(std::string_view text, Format format);
RunConfig parse_config_json(const nlohmann::json& doc);

// Canonical JSON form; parse_config_json(to_json(c)) == c.
nlohmann::ordered_json to_json(const RunConfig& cfg);

// Runtime objects.
model::SpinSystem make_spin_system(const RunConfig& cfg);
model::ClassicalSignal make_signal(const RunConfig& cfg);
// Mean resonance frequency of the target(s): omega_n of the nuclei or the tones.
double default_center(const RunConfig& cfg);
sim::PulseShape make_shape(const RunConfig& cfg);
sim::ScanSpec make_scan(const RunConfig& cfg);

}  // namespace nvpulse::config
