// nvpulse command-line tool.
//
//   nvpulse fourier  [--config FILE] --profile tophat --l 25,27,29 --alpha-max 4 --alpha-step 0.05
//   nvpulse shape    [--config FILE] --alpha 30 --harmonic 63 --field "1.5 T" --csv env.csv
//   nvpulse spectrum --config FILE [--points N --span "20 kHz" --csv out.csv --json out.json]
//   nvpulse energy   [--config FILE] --reference "100 MHz"
//   nvpulse predict  --config FILE
//
// Exit status: 0 when every internal invariant check passes, 1 when one fails,
// 2 for usage, configuration or runtime errors.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nvpulse/config.hpp"
#include "nvpulse/error.hpp"
#include "nvpulse/metrics.hpp"
#include "nvpulse/model.hpp"
#include "nvpulse/modulation.hpp"
#include "nvpulse/output.hpp"
#include "nvpulse/shaper.hpp"
#include "nvpulse/simulator.hpp"

namespace {

namespace fs = std::filesystem;
using namespace nvpulse;
using config::Dimension;

constexpr double kPi = std::numbers::pi;

// Invariant failures are reported but do not abort the verb.
struct Invariants {
  bool ok = true;
  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      std::cerr << "invariant failed: " << what << '\n';
    }
  }
};

// Flags shared by every verb; each one overrides the matching config field.
struct Overrides {
  std::string config;
  std::string field, rabi, span, center, target, phases;
  std::optional<int> harmonic, periods, pulses, alpha, points;
  std::optional<double> gamma;
  bool refine = false;
  std::optional<std::size_t> samples;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "run configuration (.json or .toml)")->check(CLI::ExistingFile);
    app->add_option("--field", field, "bias field B_z, e.g. \"2 T\"");
    app->add_option("--harmonic", harmonic, "target harmonic k (or l)")->check(CLI::PositiveNumber);
    app->add_option("--periods", periods, "number of sequence periods N")->check(CLI::PositiveNumber);
    app->add_option("--pulses", pulses, "number of pi-pulses (2 per period)")->check(CLI::PositiveNumber);
    app->add_option("--phases", phases, "phase pattern, e.g. XYXYYXYX");
    app->add_option("--alpha", alpha, "shaped-pulse alpha")->check(CLI::PositiveNumber);
    app->add_option("--gamma", gamma, "shaped-pulse gamma = t_pi / c")->check(CLI::PositiveNumber);
    app->add_option("--rabi", rabi, "top-hat Rabi frequency, e.g. \"42 MHz\"");
    app->add_flag("--refine", refine, "refine beta numerically");
    app->add_option("--samples", samples, "envelope cells of shaped pulses");
    app->add_option("--span", span, "scan width in k w_m, e.g. \"40 kHz\"");
    app->add_option("--points", points, "scan points")->check(CLI::Range(3, 100000));
    app->add_option("--center", center, "scan centre in k w_m, e.g. \"85.19 MHz\"");
    app->add_option("--target", target, "design frequency of shaped pulses (l w_m)");
  }

  void apply(config::RunConfig& c) const {
    if (!field.empty()) c.system.field = config::parse_quantity(field, Dimension::Field, "--field");
    if (harmonic) c.sequence.harmonic = *harmonic;
    if (periods && pulses) throw ParseError("--pulses", "give either --periods or --pulses");
    if (periods) c.sequence.periods = *periods;
    if (pulses) {
      if (*pulses % 2) throw ParseError("--pulses", "must be even (two pulses per period)");
      c.sequence.periods = *pulses / 2;
    }
    if (!phases.empty()) {
      modulation::parse_phase_pattern(phases);
      c.sequence.phases = phases;
    }
    if (alpha) {
      c.pulse.kind = config::ShapeKind::Shaped;
      c.pulse.rabi.reset();
      c.pulse.alpha = *alpha;
    }
    if (gamma) c.pulse.gamma = *gamma;
    if (refine) c.pulse.refine = true;
    if (samples) c.pulse.samples = *samples;
    if (!rabi.empty()) {
      if (alpha) throw ParseError("--rabi", "mutually exclusive with --alpha");
      c.pulse.kind = config::ShapeKind::TopHat;
      c.pulse.rabi = config::parse_quantity(rabi, Dimension::Frequency, "--rabi");
      if (!(*c.pulse.rabi > 0.0)) throw ParseError("--rabi", "must be positive");
    }
    if (!span.empty()) c.scan.span = config::parse_quantity(span, Dimension::Frequency, "--span");
    if (points) c.scan.points = *points;
    if (!center.empty()) c.scan.center = config::parse_quantity(center, Dimension::Frequency, "--center");
    if (!target.empty()) c.scan.target = config::parse_quantity(target, Dimension::Frequency, "--target");
  }

  config::RunConfig load() const {
    config::RunConfig c;
    if (!config.empty()) c = config::parse_config(config);
    apply(c);
    return c;
  }
};

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    io::write_file(path, text);
  }
}

// Design frequency l w_m of a shaped pulse: explicit target, scan centre,
// the configured system, or the bare Larmor frequency of --species at --field.
double design_target(const config::RunConfig& c, const std::string& species) {
  if (c.scan.target) return *c.scan.target;
  if (c.scan.center) return *c.scan.center;
  if (!c.system.nuclei.empty() || c.system.signal) return config::default_center(c);
  if (c.system.field) return std::abs(model::gyromagnetic_ratio(species) * *c.system.field);
  throw ParseError("--target", "no design frequency: give --target, --center, --field or --config");
}

shaper::ShapedPulse design_pulse(const config::RunConfig& c, double target) {
  if (c.pulse.kind != config::ShapeKind::Shaped) throw ParseError("pulse.kind", "a shaped pulse is required (--alpha)");
  shaper::DesignOptions opt;
  opt.samples = c.pulse.samples;
  opt.refine = c.pulse.refine;
  return shaper::ShapedPulse::design_for_frequency(c.pulse.alpha, c.pulse.gamma, c.sequence.harmonic, target, opt);
}

std::vector<double> alpha_grid(double lo, double hi, double step) {
  if (lo < 0.0 || hi < lo || !(step > 0.0)) throw ParseError("--alpha-step", "need 0 <= alpha-min <= alpha-max, step > 0");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(lo + step * static_cast<double>(i));
  return out;
}

int run_fourier(const Overrides& ov, const std::string& profile, std::vector<int> ls, double a_min, double a_max,
                double a_step, const std::string& csv) {
  const config::RunConfig c = ov.load();
  if (ls.empty()) ls = {c.sequence.harmonic};
  Invariants inv;
  std::vector<io::CoefficientRow> rows;
  const double T = 1.0;
  for (int l : ls) {
    if (l < 1) throw ParseError("--l", "harmonics must be >= 1");
    if (profile == "instantaneous") {
      const double f = modulation::f_l_instantaneous(l);
      const double q = modulation::f_l_numeric(modulation::ModulationFunction::instantaneous(T), l);
      inv.check(std::abs(q - f) <= 1e-9, fmt::format("instantaneous f_{} quadrature mismatch", l));
      rows.push_back({l, 0.0, f});
    } else if (profile == "tophat") {
      for (double a : alpha_grid(a_min, a_max, a_step)) {
        const double f = modulation::f_l_tophat(l, a);
        if (2.0 * a <= l) {
          const auto F = a == 0.0 ? modulation::ModulationFunction::instantaneous(T)
                                  : modulation::ModulationFunction::tophat(T, a * T / l);
          const double q = modulation::f_l_numeric(F, l);
          // f_l(alpha) has zeros at half-integer alpha; the floor keeps the check meaningful there.
          inv.check(std::abs(q - f) <= 1e-6 * std::max(std::abs(f), 1e-6 * std::abs(modulation::f_l_instantaneous(l))),
                    fmt::format("f_{}({}) quadrature {} vs closed form {}", l, a, q, f));
        }
        rows.push_back({l, a, f});
      }
    } else {
      const int lo = std::max(1, static_cast<int>(std::ceil(a_min)));
      const int hi = static_cast<int>(std::floor(a_max));
      for (int a = lo; a <= hi && 2 * a <= l; ++a) {
        shaper::DesignOptions opt;
        opt.refine = c.pulse.refine;
        const auto pulse = shaper::ShapedPulse::design(a, c.pulse.gamma, l, T, opt);
        const double f = modulation::f_l_numeric(pulse.modulation(T), l);
        inv.check(std::abs(std::abs(f) - std::abs(modulation::f_l_instantaneous(l))) <= 1e-3 * std::abs(f),
                  fmt::format("shaped |f_{}| deviates from the instantaneous value at alpha = {}", l, a));
        rows.push_back({l, static_cast<double>(a), f});
      }
    }
  }
  write_or_print(csv, io::coefficients_csv(rows));
  return inv.ok ? 0 : 1;
}

int run_shape(const Overrides& ov, const std::string& species, const std::string& period, const std::string& csv,
              const std::string& json) {
  config::RunConfig c = ov.load();
  double target = 0.0;
  if (!period.empty()) {
    target = 2.0 * kPi * c.sequence.harmonic / config::parse_quantity(period, Dimension::Time, "--period");
  } else {
    target = design_target(c, species);
  }
  const auto pulse = design_pulse(c, target);
  const auto summary = io::shape_summary(pulse);
  Invariants inv;
  inv.check(std::abs(pulse.area() - kPi) <= 1e-6, fmt::format("pulse area {} differs from pi", pulse.area()));
  const double residual = std::abs(summary["overlap_residual"].get<double>());
  inv.check(residual <= (pulse.refined() ? 1e-9 : 1e-3), fmt::format("overlap residual {:.3e}", residual));
  if (!csv.empty()) write_or_print(csv, io::envelope_csv(pulse));
  write_or_print(json, io::dump(summary));
  return inv.ok ? 0 : 1;
}

fs::path resolve(const std::string& given, const std::string& from_config, const std::string& out_dir) {
  const std::string p = given.empty() ? from_config : given;
  if (p.empty() || p == "-" || out_dir.empty() || fs::path(p).is_absolute()) return p;
  return fs::path(out_dir) / p;
}

int run_spectrum(const Overrides& ov, unsigned threads, const std::string& csv, const std::string& json,
                 const std::string& out_dir) {
  if (ov.config.empty()) throw ParseError("--config", "spectrum needs a configuration file");
  const config::RunConfig c = ov.load();
  auto spec = config::make_scan(c);
  spec.threads = threads;
  const auto result = c.classical() ? sim::scan_spectrum(config::make_signal(c), spec)
                                    : sim::scan_spectrum(config::make_spin_system(c), spec);
  Invariants inv;
  inv.check(result.max_unitarity_error < 1e-8, fmt::format("unitarity error {:.3e}", result.max_unitarity_error));
  for (const auto& row : result.rows) {
    inv.check(std::abs(row.sigma_x) <= 1.0 + 1e-9, fmt::format("|<sigma_x>| = {} exceeds 1", row.sigma_x));
  }
  const fs::path csv_path = resolve(csv, c.output.csv, out_dir);
  const fs::path json_path = resolve(json, c.output.json, out_dir);
  if (csv_path.empty() || csv_path == "-") {
    write_or_print("-", io::spectrum_csv(result));
    if (!json_path.empty() && json_path != "-") io::write_file(json_path, io::dump(io::spectrum_metadata(result)));
  } else {
    io::emit_results(result, {csv_path, json_path == "-" ? fs::path() : json_path});
    if (json_path == "-") write_or_print("-", io::dump(io::spectrum_metadata(result)));
  }
  return inv.ok ? 0 : 1;
}

int run_energy(const Overrides& ov, const std::string& species, const std::string& reference, const std::string& json) {
  const config::RunConfig c = ov.load();
  const double ref = config::parse_quantity(reference, Dimension::Frequency, "--reference");
  if (!(ref > 0.0)) throw ParseError("--reference", "must be positive");
  const auto pulse = design_pulse(c, design_target(c, species));
  const auto report = metrics::energy_report(pulse, ref);
  Invariants inv;
  inv.check(report.pulse_energy > 0.0, "pulse energy must be positive");
  inv.check(report.energy_premium >= 1.0 - 1e-9,
            fmt::format("energy premium {} below the constant-amplitude bound", report.energy_premium));
  const double expected = std::pow(ref / report.peak_rabi, 2);
  inv.check(std::abs(report.peak_power_ratio - expected) <= 1e-12 * expected, "peak-power ratio mismatch");
  auto out = io::energy_json(report);
  out["shape"] = io::shape_summary(pulse);
  write_or_print(json, io::dump(out));
  return inv.ok ? 0 : 1;
}

int run_predict(const Overrides& ov, std::size_t nucleus, const std::string& json) {
  if (ov.config.empty()) throw ParseError("--config", "predict needs a configuration file");
  const config::RunConfig c = ov.load();
  const int k = c.sequence.harmonic;
  const double center = c.scan.center ? *c.scan.center : config::default_center(c);
  const double period = 2.0 * kPi * k / center;
  const double t_f = period * c.sequence.periods;
  double f = 0.0;
  double alpha = 0.0;
  const auto shape = config::make_shape(c);
  if (std::holds_alternative<sim::Instantaneous>(shape)) {
    f = modulation::f_l_instantaneous(k);
  } else if (const auto* t = std::get_if<sim::TopHat>(&shape)) {
    alpha = (kPi / t->rabi) * k / period;
    f = modulation::f_l_tophat(k, alpha);
  } else {
    const auto& pulse = *std::get<sim::Shaped>(shape).pulse;
    alpha = pulse.params().alpha;
    f = modulation::f_l_numeric(pulse.modulation(period), k);
  }
  nlohmann::ordered_json out;
  out["harmonic"] = k;
  out["alpha"] = std::stod(io::format_number(alpha));
  out["f_k"] = std::stod(io::format_number(f));
  out["final_time_us"] = std::stod(io::format_number(t_f * 1e6));
  Invariants inv;
  if (c.classical()) {
    const auto sig = config::make_signal(c);
    const double omega_s = sig.tones().front().amplitude;
    out["target"] = "classical";
    out["coupling_kHz"] = std::stod(io::format_number(omega_s / (2.0 * kPi) / 1e3));
    out["sigma_x"] = std::stod(io::format_number(sim::predict_signal(f, omega_s, t_f, sim::Target::Classical)));
  } else {
    const auto sys = config::make_spin_system(c);
    if (nucleus >= sys.size()) throw ParseError("--nucleus", "index out of range");
    inv.check(sys.harmonic_valid(k), fmt::format("harmonic {} violates |gamma_n B_z| >> k A_perp", k));
    const double a_perp = sys.frame(nucleus).perpendicular;
    out["target"] = "nuclear";
    out["nucleus"] = nucleus;
    out["coupling_kHz"] = std::stod(io::format_number(a_perp / (2.0 * kPi) / 1e3));
    out["sigma_x"] = std::stod(io::format_number(sim::predict_signal(f, a_perp, t_f, sim::Target::Nuclear)));
  }
  write_or_print(json, io::dump(out));
  return inv.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shaped pi-pulses for dynamical decoupling: design, simulation and energy accounting"};
  app.require_subcommand(1);

  Overrides ov_fourier, ov_shape, ov_spectrum, ov_energy, ov_predict;

  auto* fourier = app.add_subcommand("fourier", "Fourier coefficients f_l of the modulation function");
  ov_fourier.attach(fourier);
  std::string profile = "tophat";
  std::vector<int> ls;
  double a_min = 0.0, a_max = 4.0, a_step = 0.5;
  std::string fourier_csv;
  fourier->add_option("--profile", profile, "window profile (default tophat)")->check(CLI::IsMember({"instantaneous", "tophat", "shaped"}));
  fourier->add_option("--l", ls, "harmonics, comma separated")->delimiter(',');
  fourier->add_option("--alpha-min", a_min, "tophat alpha sweep start");
  fourier->add_option("--alpha-max", a_max, "tophat alpha sweep end");
  fourier->add_option("--alpha-step", a_step, "tophat alpha sweep step");
  fourier->add_option("--csv", fourier_csv, "output CSV (default stdout)");

  auto* shape = app.add_subcommand("shape", "design a shaped pi-pulse");
  ov_shape.attach(shape);
  std::string species = "H", period, shape_csv, shape_json;
  shape->add_option("--species", species, "nucleus setting the design frequency with --field");
  shape->add_option("--period", period, "sequence period T, e.g. \"0.98 us\"");
  shape->add_option("--csv", shape_csv, "envelope CSV (t_us, F_z, rabi_MHz)");
  shape->add_option("--json", shape_json, "summary JSON (default stdout)");

  auto* spectrum = app.add_subcommand("spectrum", "simulate a modulation-frequency scan");
  ov_spectrum.attach(spectrum);
  unsigned threads = 0;
  std::string spec_csv, spec_json, out_dir;
  spectrum->add_option("--threads", threads, "worker threads (default NVPULSE_THREADS or all cores)");
  spectrum->add_option("--csv", spec_csv, "spectrum CSV ('-' for stdout)");
  spectrum->add_option("--json", spec_json, "metadata JSON ('-' for stdout)");
  spectrum->add_option("--out-dir", out_dir, "directory for relative output paths");

  auto* energy = app.add_subcommand("energy", "energy and peak-power ratios against a top-hat pulse");
  ov_energy.attach(energy);
  std::string reference, energy_json, energy_species = "H";
  energy->add_option("--reference", reference, "top-hat Rabi frequency, e.g. \"100 MHz\"")->required();
  energy->add_option("--species", energy_species, "nucleus setting the design frequency with --field");
  energy->add_option("--json", energy_json, "output JSON (default stdout)");

  auto* predict = app.add_subcommand("predict", "closed-form resonant signal");
  ov_predict.attach(predict);
  std::size_t nucleus = 0;
  std::string predict_json;
  predict->add_option("--nucleus", nucleus, "nucleus index");
  predict->add_option("--json", predict_json, "output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*fourier) return run_fourier(ov_fourier, profile, ls, a_min, a_max, a_step, fourier_csv);
    if (*shape) return run_shape(ov_shape, species, period, shape_csv, shape_json);
    if (*spectrum) return run_spectrum(ov_spectrum, threads, spec_csv, spec_json, out_dir);
    if (*energy) return run_energy(ov_energy, energy_species, reference, energy_json);
    if (*predict) return run_predict(ov_predict, nucleus, predict_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
