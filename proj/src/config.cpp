#include "nvpulse/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "nvpulse/error.hpp"

namespace nvpulse::config {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct UnitEntry {
  std::string_view name;
  double scale;
};

constexpr std::array kFrequencyUnits{UnitEntry{"Hz", 1.0}, UnitEntry{"kHz", 1e3}, UnitEntry{"MHz", 1e6},
                                     UnitEntry{"GHz", 1e9}, UnitEntry{"rad/s", 1.0}};
constexpr std::array kFieldUnits{UnitEntry{"T", 1.0}, UnitEntry{"mT", 1e-3}, UnitEntry{"uT", 1e-6},
                                 UnitEntry{"G", 1e-4}};
constexpr std::array kTimeUnits{UnitEntry{"s", 1.0}, UnitEntry{"ms", 1e-3}, UnitEntry{"us", 1e-6},
                                UnitEntry{"ns", 1e-9}, UnitEntry{"ps", 1e-12}};
constexpr std::array kLengthUnits{UnitEntry{"m", 1.0}, UnitEntry{"nm", 1e-9}, UnitEntry{"pm", 1e-12},
                                  UnitEntry{"A", 1e-10}};

std::span<const UnitEntry> units_for(Dimension dim) {
  switch (dim) {
    case Dimension::Frequency:
      return kFrequencyUnits;
    case Dimension::Field:
      return kFieldUnits;
    case Dimension::Time:
      return kTimeUnits;
    case Dimension::Length:
      return kLengthUnits;
  }
  return {};
}

double unit_scale(Dimension dim, std::string_view unit, const std::string& field) {
  for (const auto& u : units_for(dim)) {
    if (u.name == unit) return dim == Dimension::Frequency && unit != "rad/s" ? u.scale * kTwoPi : u.scale;
  }
  std::string known;
  for (const auto& u : units_for(dim)) known += (known.empty() ? "" : ", ") + std::string(u.name);
  throw UnitError(fmt::format("{}: unknown unit '{}' (expected one of {})", field, unit, known));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Object reader that tracks consumed keys so leftovers are reported.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ParseError(path_.empty() ? "<root>" : path_, "expected a table/object");
  }

  std::string path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    const auto it = obj_.find(std::string(key));
    if (it == obj_.end()) return nullptr;
    used_.insert(std::string(key));
    return &*it;
  }

  const json& require(std::string_view key) {
    const json* v = find(key);
    if (!v) throw ParseError(path(key), "required field is missing");
    return *v;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) throw ParseError(path(key), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

double quantity(const json& v, Dimension dim, const std::string& field) {
  if (v.is_number()) throw UnitError(field + ": missing unit suffix");
  if (!v.is_string()) throw ParseError(field, "expected a quantity string such as \"2 T\"");
  return parse_quantity(v.get<std::string>(), dim, field);
}

model::Vec3 vector_quantity(const json& v, Dimension dim, const std::string& field) {
  if (!v.is_array() || v.size() != 3) throw ParseError(field, "expected an array of three quantities");
  model::Vec3 out;
  for (int i = 0; i < 3; ++i) out(i) = quantity(v[static_cast<std::size_t>(i)], dim, fmt::format("{}[{}]", field, i));
  return out;
}

int integer(const json& v, const std::string& field, int min) {
  if (!v.is_number_integer()) throw ParseError(field, "expected an integer");
  const auto n = v.get<long long>();
  if (n < min || n > 100'000'000) throw ParseError(field, fmt::format("must be an integer >= {}", min));
  return static_cast<int>(n);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ParseError(field, "expected a number");
  return v.get<double>();
}

std::string string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ParseError(field, "expected a string");
  return v.get<std::string>();
}

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(toml_to_json(v));
    return out;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  throw ParseError({}, "unsupported TOML value (dates and times are not used)");
}

NucleusSpec parse_nucleus(const json& v, const std::string& path) {
  Reader r(v, path);
  NucleusSpec n;
  if (const json* s = r.find("species")) n.species = string(*s, r.path("species"));
  try {
    model::gyromagnetic_ratio(n.species);
  } catch (const std::invalid_argument& e) {
    throw ParseError(r.path("species"), e.what());
  }
  if (const json* h = r.find("hyperfine")) n.hyperfine = vector_quantity(*h, Dimension::Frequency, r.path("hyperfine"));
  if (const json* p = r.find("position")) n.position = vector_quantity(*p, Dimension::Length, r.path("position"));
  if (n.hyperfine.has_value() == n.position.has_value()) {
    throw ParseError(path, "give exactly one of 'hyperfine' or 'position'");
  }
  r.finish();
  return n;
}

SystemSpec parse_system(const json& v) {
  Reader r(v, "system");
  SystemSpec s;
  if (const json* f = r.find("field")) s.field = quantity(*f, Dimension::Field, r.path("field"));
  if (const json* q = r.find("validity_ratio")) {
    s.validity_ratio = number(*q, r.path("validity_ratio"));
    if (!(s.validity_ratio > 0.0)) throw ParseError(r.path("validity_ratio"), "must be positive");
  }
  if (const json* ns = r.find("nuclei")) {
    if (!ns->is_array()) throw ParseError(r.path("nuclei"), "expected an array");
    for (std::size_t i = 0; i < ns->size(); ++i) {
      s.nuclei.push_back(parse_nucleus((*ns)[i], fmt::format("system.nuclei[{}]", i)));
    }
  }
  if (const json* sig = r.find("signal")) {
    Reader rs(*sig, "system.signal");
    SignalSpec spec;
    if (const json* f = rs.find("field")) spec.field = quantity(*f, Dimension::Field, rs.path("field"));
    if (const json* a = rs.find("amplitude")) spec.amplitude = quantity(*a, Dimension::Frequency, rs.path("amplitude"));
    if (spec.field.has_value() == spec.amplitude.has_value()) {
      throw ParseError("system.signal", "give exactly one of 'field' or 'amplitude'");
    }
    const json& tones = rs.require("tones");
    if (!tones.is_array() || tones.empty()) throw ParseError(rs.path("tones"), "expected a non-empty array");
    for (std::size_t i = 0; i < tones.size(); ++i) {
      const double w = quantity(tones[i], Dimension::Frequency, fmt::format("system.signal.tones[{}]", i));
      if (!(w > 0.0)) throw ParseError(fmt::format("system.signal.tones[{}]", i), "must be positive");
      spec.tones.push_back(w);
    }
    rs.finish();
    s.signal = std::move(spec);
  }
  if (s.nuclei.empty() == !s.signal.has_value()) {
    throw ParseError("system", "give either 'nuclei' or 'signal'");
  }
  if (!s.nuclei.empty() && !s.field) throw ParseError("system.field", "required for nuclear targets");
  if (s.field && *s.field == 0.0) throw ParseError("system.field", "must be non-zero");
  r.finish();
  return s;
}

SequenceSpec parse_sequence(const json& v) {
  Reader r(v, "sequence");
  SequenceSpec s;
  s.harmonic = integer(r.require("harmonic"), "sequence.harmonic", 1);
  const json* periods = r.find("periods");
  const json* pulses = r.find("pulses");
  if ((periods != nullptr) == (pulses != nullptr)) {
    throw ParseError("sequence", "give exactly one of 'periods' or 'pulses'");
  }
  if (periods) {
    s.periods = integer(*periods, "sequence.periods", 1);
  } else {
    const int n = integer(*pulses, "sequence.pulses", 2);
    if (n % 2 != 0) throw ParseError("sequence.pulses", "must be even (two pulses per period)");
    s.periods = n / 2;
  }
  if (const json* p = r.find("phases")) {
    s.phases = string(*p, "sequence.phases");
    try {
      modulation::parse_phase_pattern(s.phases);
    } catch (const std::invalid_argument& e) {
      throw ParseError("sequence.phases", e.what());
    }
  }
  r.finish();
  return s;
}

PulseSpec parse_pulse(const json& v) {
  Reader r(v, "pulse");
  PulseSpec p;
  const std::string kind = string(r.require("kind"), "pulse.kind");
  if (kind == "instantaneous") {
    p.kind = ShapeKind::Instantaneous;
  } else if (kind == "tophat") {
    p.kind = ShapeKind::TopHat;
  } else if (kind == "shaped") {
    p.kind = ShapeKind::Shaped;
  } else {
    throw ParseError("pulse.kind", "expected instantaneous, tophat or shaped, got '" + kind + "'");
  }
  const json* rabi = r.find("rabi");
  const json* alpha = r.find("alpha");
  const json* gamma = r.find("gamma");
  const json* refine = r.find("refine");
  const json* samples = r.find("samples");
  auto forbid = [&](const json* field, std::string_view name) {
    if (field) throw ParseError(r.path(name), "not allowed for pulse kind '" + kind + "'");
  };
  switch (p.kind) {
    case ShapeKind::Instantaneous:
      forbid(rabi, "rabi");
      [[fallthrough]];
    case ShapeKind::TopHat:
      forbid(alpha, "alpha");
      forbid(gamma, "gamma");
      forbid(refine, "refine");
      forbid(samples, "samples");
      break;
    case ShapeKind::Shaped:
      forbid(rabi, "rabi");
      break;
  }
  if (p.kind == ShapeKind::TopHat) {
    if (!rabi) throw ParseError("pulse.rabi", "required for top-hat pulses");
    p.rabi = quantity(*rabi, Dimension::Frequency, "pulse.rabi");
    if (!(*p.rabi > 0.0)) throw ParseError("pulse.rabi", "must be positive");
  }
  if (p.kind == ShapeKind::Shaped) {
    if (!alpha) throw ParseError("pulse.alpha", "required for shaped pulses");
    p.alpha = integer(*alpha, "pulse.alpha", 1);
    if (gamma) {
      p.gamma = number(*gamma, "pulse.gamma");
      if (!(p.gamma > 0.0)) throw ParseError("pulse.gamma", "must be positive");
    }
    if (refine) {
      if (!refine->is_boolean()) throw ParseError("pulse.refine", "expected true or false");
      p.refine = refine->get<bool>();
    }
    if (samples) p.samples = static_cast<std::size_t>(integer(*samples, "pulse.samples", 0));
  }
  r.finish();
  return p;
}

ScanSpec parse_scan(const json& v) {
  Reader r(v, "scan");
  ScanSpec s;
  if (const json* c = r.find("center")) s.center = quantity(*c, Dimension::Frequency, "scan.center");
  if (const json* t = r.find("target")) s.target = quantity(*t, Dimension::Frequency, "scan.target");
  s.span = quantity(r.require("span"), Dimension::Frequency, "scan.span");
  if (s.span < 0.0) throw ParseError("scan.span", "must be non-negative");
  if (const json* p = r.find("points")) s.points = integer(*p, "scan.points", 3);
  r.finish();
  return s;
}

OutputSpec parse_output(const json& v) {
  Reader r(v, "output");
  OutputSpec o;
  if (const json* c = r.find("csv")) o.csv = string(*c, "output.csv");
  if (const json* j = r.find("json")) o.json = string(*j, "output.json");
  r.finish();
  return o;
}

// Shortest "<number> <unit>" text that parses back to exactly `value`.
std::string exact_quantity(double value, Dimension dim, std::string_view unit) {
  const double scale = unit_scale(dim, unit, {});
  const double x = value / scale;
  for (int digits = 12; digits <= 17; ++digits) {
    std::string text = fmt::format("{:.{}g} {}", x, digits, unit);
    if (parse_quantity(text, dim) == value) return text;
  }
  // x * scale can miss `value` by an ulp; nudge the printed number.
  double y = x;
  for (int i = 1; i <= 8; ++i) {
    for (double dir : {1.0, -1.0}) {
      y = x;
      for (int k = 0; k < i; ++k) y = std::nextafter(y, dir * INFINITY);
      std::string text = fmt::format("{:.17g} {}", y, unit);
      if (parse_quantity(text, dim) == value) return text;
    }
  }
  // Not every double is a scaled double; angular units are exact.
  if (dim == Dimension::Frequency) return fmt::format("{:.17g} rad/s", value);
  return fmt::format("{:.17g} {}", x, unit);
}

ordered_json vector_to_json(const model::Vec3& v, Dimension dim, std::string_view unit) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < 3; ++i) a.push_back(exact_quantity(v(i), dim, unit));
  return a;
}

}  // namespace

double parse_quantity(std::string_view text, Dimension dim, const std::string& field) {
  const std::string_view s = trim(text);
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (!s.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{}) throw ParseError(field, fmt::format("cannot read a number from '{}'", text));
  const std::string_view unit = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
  if (unit.empty()) throw UnitError(fmt::format("{}: missing unit suffix in '{}'", field, text));
  return value * unit_scale(dim, unit, field);
}

std::string format_quantity(double value, Dimension dim, std::string_view unit) {
  return fmt::format("{:.12g} {}", value / unit_scale(dim, unit, {}), unit);
}

RunConfig parse_config_json(const json& doc) {
  Reader r(doc, "");
  RunConfig c;
  c.system = parse_system(r.require("system"));
  c.sequence = parse_sequence(r.require("sequence"));
  c.pulse = parse_pulse(r.require("pulse"));
  c.scan = parse_scan(r.require("scan"));
  if (const json* o = r.find("output")) c.output = parse_output(*o);
  r.finish();
  return c;
}

RunConfig parse_config_text(std::string_view text, Format format) {
  json doc;
  if (format == Format::Json) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError("<json>", e.what());
    }
  } else {
    try {
      const toml::table table = toml::parse(text);
      doc = toml_to_json(table);
    } catch (const toml::parse_error& e) {
      const auto& src = e.source();
      throw ParseError("<toml>", fmt::format("line {}, column {}: {}", src.begin.line, src.begin.column,
                                             e.description()));
    }
  }
  return parse_config_json(doc);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string ext = path.extension().string();
  if (ext == ".json") return parse_config_text(buf.str(), Format::Json);
  if (ext == ".toml") return parse_config_text(buf.str(), Format::Toml);
  throw ParseError(path.string(), "config extension must be .json or .toml");
}

ordered_json to_json(const RunConfig& c) {
  ordered_json doc;
  ordered_json sys = ordered_json::object();
  if (c.system.field) sys["field"] = exact_quantity(*c.system.field, Dimension::Field, "T");
  sys["validity_ratio"] = c.system.validity_ratio;
  if (!c.system.nuclei.empty()) {
    ordered_json nuclei = ordered_json::array();
    for (const auto& n : c.system.nuclei) {
      ordered_json e;
      e["species"] = n.species;
      if (n.hyperfine) e["hyperfine"] = vector_to_json(*n.hyperfine, Dimension::Frequency, "kHz");
      if (n.position) e["position"] = vector_to_json(*n.position, Dimension::Length, "nm");
      nuclei.push_back(std::move(e));
    }
    sys["nuclei"] = std::move(nuclei);
  }
  if (c.system.signal) {
    const auto& s = *c.system.signal;
    ordered_json sig;
    if (s.field) sig["field"] = exact_quantity(*s.field, Dimension::Field, "G");
    if (s.amplitude) sig["amplitude"] = exact_quantity(*s.amplitude, Dimension::Frequency, "kHz");
    ordered_json tones = ordered_json::array();
    for (double w : s.tones) tones.push_back(exact_quantity(w, Dimension::Frequency, "MHz"));
    sig["tones"] = std::move(tones);
    sys["signal"] = std::move(sig);
  }
  doc["system"] = std::move(sys);
  doc["sequence"] = {{"harmonic", c.sequence.harmonic}, {"periods", c.sequence.periods},
                     {"phases", c.sequence.phases}};
  ordered_json pulse;
  switch (c.pulse.kind) {
    case ShapeKind::Instantaneous:
      pulse["kind"] = "instantaneous";
      break;
    case ShapeKind::TopHat:
      pulse["kind"] = "tophat";
      pulse["rabi"] = exact_quantity(*c.pulse.rabi, Dimension::Frequency, "MHz");
      break;
    case ShapeKind::Shaped:
      pulse["kind"] = "shaped";
      pulse["alpha"] = c.pulse.alpha;
      pulse["gamma"] = c.pulse.gamma;
      pulse["refine"] = c.pulse.refine;
      pulse["samples"] = c.pulse.samples;
      break;
  }
  doc["pulse"] = std::move(pulse);
  ordered_json scan;
  if (c.scan.center) scan["center"] = exact_quantity(*c.scan.center, Dimension::Frequency, "MHz");
  if (c.scan.target) scan["target"] = exact_quantity(*c.scan.target, Dimension::Frequency, "MHz");
  scan["span"] = exact_quantity(c.scan.span, Dimension::Frequency, "kHz");
  scan["points"] = c.scan.points;
  doc["scan"] = std::move(scan);
  if (!c.output.csv.empty() || !c.output.json.empty()) {
    ordered_json out;
    if (!c.output.csv.empty()) out["csv"] = c.output.csv;
    if (!c.output.json.empty()) out["json"] = c.output.json;
    doc["output"] = std::move(out);
  }
  return doc;
}

model::SpinSystem make_spin_system(const RunConfig& c) {
  if (c.system.nuclei.empty()) throw ParseError("system.nuclei", "configuration has no nuclei");
  std::vector<model::Nucleus> nuclei;
  for (const auto& n : c.system.nuclei) {
    model::Nucleus nuc;
    nuc.gamma_n = model::gyromagnetic_ratio(n.species);
    nuc.hyperfine = n.hyperfine ? *n.hyperfine : model::hyperfine_from_position(*n.position, nuc.gamma_n);
    nuclei.push_back(nuc);
  }
  return model::SpinSystem(*c.system.field, std::move(nuclei), c.system.validity_ratio);
}

model::ClassicalSignal make_signal(const RunConfig& c) {
  if (!c.system.signal) throw ParseError("system.signal", "configuration has no classical signal");
  const auto& s = *c.system.signal;
  if (s.field) return model::ClassicalSignal::from_field(*s.field, s.tones);
  std::vector<model::Tone> tones;
  for (double w : s.tones) tones.push_back({*s.amplitude, w});
  return model::ClassicalSignal(std::move(tones));
}

double default_center(const RunConfig& c) {
  double sum = 0.0;
  if (c.classical()) {
    for (double w : c.system.signal->tones) sum += w;
    return sum / static_cast<double>(c.system.signal->tones.size());
  }
  const auto sys = make_spin_system(c);
  for (std::size_t i = 0; i < sys.size(); ++i) sum += sys.frame(i).resonance;
  return sum / static_cast<double>(sys.size());
}

sim::PulseShape make_shape(const RunConfig& c) {
  switch (c.pulse.kind) {
    case ShapeKind::Instantaneous:
      return sim::Instantaneous{};
    case ShapeKind::TopHat:
      return sim::TopHat{*c.pulse.rabi};
    case ShapeKind::Shaped: {
      const double target = c.scan.target ? *c.scan.target : (c.scan.center ? *c.scan.center : default_center(c));
      shaper::DesignOptions opt;
      opt.samples = c.pulse.samples;
      opt.refine = c.pulse.refine;
      return sim::Shaped{std::make_shared<const shaper::ShapedPulse>(shaper::ShapedPulse::design_for_frequency(
          c.pulse.alpha, c.pulse.gamma, c.sequence.harmonic, target, opt))};
    }
  }
  throw ParseError("pulse.kind", "unhandled pulse kind");
}

sim::ScanSpec make_scan(const RunConfig& c) {
  sim::ScanSpec s;
  s.harmonic = c.sequence.harmonic;
  s.periods = c.sequence.periods;
  s.phases = modulation::parse_phase_pattern(c.sequence.phases);
  s.shape = make_shape(c);
  s.center = c.scan.center ? *c.scan.center : default_center(c);
  s.span = c.scan.span;
  s.points = c.scan.points;
  s.reference = s.center;
  return s;
}

}  // namespace nvpulse::config
