#include "spinregen/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "spinregen/constants.hpp"
#include "spinregen/error.hpp"

namespace spinregen {

namespace {

// value_si = value * factor, or value / factor when `divide` is set; division
// by an exact power of ten keeps echo -> load round trips stable.
struct Unit {
  std::string_view suffix;
  double factor;
  bool divide;
};

constexpr std::array kUnits{
    Unit{"k", 1.0, false},      Unit{"m", 1.0, false},       Unit{"mm", 1e3, true},
    Unit{"um", 1e6, true},      Unit{"nm", 1e9, true},       Unit{"s", 1.0, false},
    Unit{"ms", 1e3, true},      Unit{"us", 1e6, true},       Unit{"ns", 1e9, true},
    Unit{"hz", 1.0, false},     Unit{"mhz", 1e6, false},     Unit{"ghz", 1e9, false},
    Unit{"rad", 1.0, false},    Unit{"mrad", 1e3, true},     Unit{"per_s", 1.0, false},
    Unit{"per_us", 1e6, false}, Unit{"j", 1.0, false},       Unit{"nj", 1e9, true},
    Unit{"pj", 1e12, true},     Unit{"w", 1.0, false},       Unit{"mw", 1e3, true},
    Unit{"u", phys::kAtomicMassUnit, false},
};

const Unit* find_unit(std::string_view suffix) {
  for (const Unit& u : kUnits) {
    if (u.suffix == suffix) return &u;
  }
  return nullptr;
}

double to_si(double v, const Unit* u) {
  if (!u) return v;
  return u->divide ? v / u->factor : v * u->factor;
}

double from_si(double v, const Unit* u) {
  if (!u) return v;
  return u->divide ? v * u->factor : v / u->factor;
}

// Splits "waist_um" into {"waist", "um"}; longest unit suffix wins so that
// "kappa_per_us" is per_us rather than us.
std::pair<std::string, std::string> split_unit(const std::string& key) {
  std::string best;
  for (const Unit& u : kUnits) {
    const std::string tail = "_" + std::string(u.suffix);
    if (key.size() > tail.size() && key.compare(key.size() - tail.size(), tail.size(), tail) == 0 &&
        u.suffix.size() > best.size()) {
      best = std::string(u.suffix);
    }
  }
  if (best.empty()) return {key, ""};
  return {key.substr(0, key.size() - best.size() - 1), best};
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

enum class Check { any, positive, nonneg, unit_interval, unit_open_low };
enum class Kind { real, count, seed, text };

struct Field {
  std::string path;
  Kind kind = Kind::real;
  Check check = Check::any;
  bool required = false;
  std::size_t min_count = 0;
  std::function<double&(RunConfig&)> real;
  std::function<std::size_t&(RunConfig&)> count;
  std::function<std::string(const RunConfig&)> get_text;
  std::function<bool(RunConfig&, const std::string&)> set_text;  // false: bad value
  std::string choices;                                            // for diagnostics
};

const Unit* unit_of(const Field& f) { return find_unit(split_unit(f.path.substr(f.path.rfind('.') + 1)).second); }

class Diagnostics {
 public:
  explicit Diagnostics(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    fail(node.IsDefined() ? node.Mark().line + 1 : 1, message);
  }
  [[noreturn]] void fail(int line, const std::string& message) const {
    throw ValidationError(source_ + ":" + std::to_string(line < 1 ? 1 : line) + ": " + message);
  }

 private:
  std::string source_;
};

const std::array<std::string, 6> kBeamNames{"signal", "control", "assist_laser", "assist_region", "pump", "probe"};

BeamGeometry& beam_by_name(RunConfig& c, std::string_view name) {
  OpticalSetup& b = c.experiment.beams;
  if (name == "signal") return b.signal;
  if (name == "control") return b.control;
  if (name == "assist_laser") return b.assist_laser;
  if (name == "assist_region") return c.experiment.gain.assist_beam;
  if (name == "pump") return b.pump;
  return b.probe;
}

std::vector<Field> build_schema() {
  std::vector<Field> s;
  auto real = [&](std::string path, Check check, std::function<double&(RunConfig&)> ref, bool required = false) {
    Field f;
    f.path = std::move(path);
    f.check = check;
    f.real = std::move(ref);
    f.required = required;
    s.push_back(std::move(f));
  };
  auto count = [&](std::string path, std::size_t min, std::function<std::size_t&(RunConfig&)> ref,
                   bool required = false) {
    Field f;
    f.path = std::move(path);
    f.kind = Kind::count;
    f.min_count = min;
    f.count = std::move(ref);
    f.required = required;
    s.push_back(std::move(f));
  };

  {
    Field f;
    f.path = "master_seed";
    f.kind = Kind::seed;
    s.push_back(std::move(f));
  }

  real("ensemble.temperature_k", Check::positive, [](RunConfig& c) -> double& { return c.experiment.ensemble.temperature; }, true);
  count("ensemble.n_atoms", 1, [](RunConfig& c) -> std::size_t& { return c.experiment.ensemble.n_atoms; }, true);
  real("ensemble.cell_length_mm", Check::positive, [](RunConfig& c) -> double& { return c.experiment.ensemble.cell_length; });
  real("ensemble.cell_radius_mm", Check::positive, [](RunConfig& c) -> double& { return c.experiment.ensemble.cell_radius; });
  real("ensemble.sample_radius_mm", Check::positive, [](RunConfig& c) -> double& { return c.experiment.ensemble.sample_radius; });
  real("ensemble.atomic_mass_u", Check::positive, [](RunConfig& c) -> double& { return c.experiment.ensemble.species.atomic_mass; });
  real("ensemble.hyperfine_ghz", Check::positive, [](RunConfig& c) -> double& { return c.experiment.ensemble.species.hyperfine_splitting_freq; });
  real("ensemble.signal_wavelength_nm", Check::positive, [](RunConfig& c) -> double& { return c.experiment.ensemble.species.signal_wavelength; });
  real("ensemble.assist_wavelength_nm", Check::positive, [](RunConfig& c) -> double& { return c.experiment.ensemble.species.assist_wavelength; });

  for (const std::string& name : kBeamNames) {
    const std::string p = "beams." + name + ".";
    real(p + "waist_um", Check::positive, [name](RunConfig& c) -> double& { return beam_by_name(c, name).waist; });
    real(p + "offset_x_mm", Check::any, [name](RunConfig& c) -> double& { return beam_by_name(c, name).transverse_offset.x; });
    real(p + "offset_y_mm", Check::any, [name](RunConfig& c) -> double& { return beam_by_name(c, name).transverse_offset.y; });
    real(p + "tilt_mrad", Check::any, [name](RunConfig& c) -> double& { return beam_by_name(c, name).tilt_angle; });
  }

  real("gain.kappa_per_us", Check::nonneg, [](RunConfig& c) -> double& { return c.experiment.gain.kappa; });
  real("gain.depol_rate_per_us", Check::nonneg, [](RunConfig& c) -> double& { return c.experiment.gain.depol_rate; });
  real("gain.partner_decay_per_us", Check::nonneg, [](RunConfig& c) -> double& { return c.experiment.gain.partner_decay; });

  real("memory.write_efficiency", Check::unit_interval, [](RunConfig& c) -> double& { return c.experiment.memory.write_efficiency; });
  real("memory.dark_lifetime_us", Check::nonneg, [](RunConfig& c) -> double& { return c.experiment.memory.dark_lifetime; });
  real("memory.equilibrium_pop1", Check::unit_interval, [](RunConfig& c) -> double& { return c.experiment.memory.equilibrium_pop1; });
  real("memory.optical_depth", Check::positive, [](RunConfig& c) -> double& { return c.experiment.memory.optical_depth; });
  real("memory.read_fwhm_ns", Check::positive, [](RunConfig& c) -> double& { return c.experiment.memory.read_fwhm; });
  {
    Field f;
    f.path = "memory.read_depletion";
    f.kind = Kind::text;
    f.choices = "projective, control_weighted";
    f.get_text = [](const RunConfig& c) { return std::string(to_string(c.experiment.memory.read_depletion)); };
    f.set_text = [](RunConfig& c, const std::string& v) {
      const auto mode = parse_read_depletion(v);
      if (mode) c.experiment.memory.read_depletion = *mode;
      return mode.has_value();
    };
    s.push_back(std::move(f));
  }
  real("memory.read_strength", Check::positive, [](RunConfig& c) -> double& { return c.experiment.memory.read_strength; });
  real("memory.reservoir_illumination", Check::unit_interval, [](RunConfig& c) -> double& { return c.experiment.memory.reservoir_illumination; });
  real("memory.detection_efficiency", Check::unit_open_low, [](RunConfig& c) -> double& { return c.experiment.memory.detection_efficiency; });
  real("memory.fwm_noise_photons", Check::nonneg, [](RunConfig& c) -> double& { return c.experiment.memory.fwm_noise_photons; });

  real("sequence.dt_ns", Check::positive, [](RunConfig& c) -> double& { return c.experiment.dt; });
  real("sequence.tp_dt_ns", Check::positive, [](RunConfig& c) -> double& { return c.experiment.tp_dt; });
  count("sequence.trial_count", 1, [](RunConfig& c) -> std::size_t& { return c.sequence.trial_count; });

  real("scan.lifetime_step_ns", Check::positive, [](RunConfig& c) -> double& { return c.scan.lifetime_step; });
  real("scan.lifetime_max_us", Check::positive, [](RunConfig& c) -> double& { return c.scan.lifetime_max; });
  real("scan.tp_max_us", Check::positive, [](RunConfig& c) -> double& { return c.scan.tp_max; });
  count("scan.tp_samples", 2, [](RunConfig& c) -> std::size_t& { return c.scan.tp_samples; });
  real("scan.calibration_target", Check::positive, [](RunConfig& c) -> double& { return c.scan.calibration_target; });
  real("scan.calibration_tolerance", Check::positive, [](RunConfig& c) -> double& { return c.scan.calibration_tolerance; });

  {
    Field f;
    f.path = "output.directory";
    f.kind = Kind::text;
    f.get_text = [](const RunConfig& c) { return c.output.directory; };
    f.set_text = [](RunConfig& c, const std::string& v) {
      c.output.directory = v;
      return !v.empty();
    };
    f.choices = "a non-empty path";
    s.push_back(std::move(f));
  }
  {
    Field f;
    f.path = "output.format";
    f.kind = Kind::text;
    f.choices = "csv, json";
    f.get_text = [](const RunConfig& c) { return c.output.format; };
    f.set_text = [](RunConfig& c, const std::string& v) {
      if (v != "csv" && v != "json") return false;
      c.output.format = v;
      return true;
    };
    s.push_back(std::move(f));
  }
  count("output.trace_stride", 1, [](RunConfig& c) -> std::size_t& { return c.output.trace_stride; });
  return s;
}

const std::vector<Field>& schema() {
  static const std::vector<Field> s = build_schema();
  return s;
}

bool is_section(const std::string& path) {
  static const std::set<std::string> sections = [] {
    std::set<std::string> out{"ensemble", "beams", "gain", "memory", "sequence", "scan", "output"};
    for (const std::string& n : kBeamNames) out.insert("beams." + n);
    return out;
  }();
  return sections.count(path) > 0;
}

std::string check_text(Check c) {
  switch (c) {
    case Check::positive: return "must be > 0";
    case Check::nonneg: return "must be >= 0";
    case Check::unit_interval: return "must lie in [0, 1]";
    case Check::unit_open_low: return "must lie in (0, 1]";
    case Check::any: break;
  }
  return "";
}

bool passes(Check c, double v) {
  if (!std::isfinite(v)) return false;
  switch (c) {
    case Check::positive: return v > 0.0;
    case Check::nonneg: return v >= 0.0;
    case Check::unit_interval: return v >= 0.0 && v <= 1.0;
    case Check::unit_open_low: return v > 0.0 && v <= 1.0;
    case Check::any: break;
  }
  return true;
}

struct EventKey {
  std::string_view key;
  const Unit* unit;
};

bool uses_power(PulseKind k) {
  return k == PulseKind::pump || k == PulseKind::probe || k == PulseKind::assist_on || k == PulseKind::assist_off;
}

class Parser {
 public:
  Parser(std::string_view source) : diag_(source) {}

  RunConfig parse(std::string_view text) {
    YAML::Node root;
    try {
      root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
      diag_.fail(e.mark.line + 1, "parse error: " + e.msg);
    }
    if (root.IsNull()) diag_.fail(1, "empty configuration");
    if (!root.IsMap()) diag_.fail(root, "top level must be a mapping of sections");

    cfg_ = default_config();
    cfg_.defaulted.clear();

    const YAML::Node version = root["schema_version"];
    if (!version) diag_.fail(1, "missing required key 'schema_version'");
    int v = 0;
    try {
      v = version.as<int>();
    } catch (const YAML::Exception&) {
      diag_.fail(version, "'schema_version' must be an integer");
    }
    if (v != kConfigSchemaVersion) {
      diag_.fail(version, "unsupported schema_version " + std::to_string(v) + " (expected " +
                              std::to_string(kConfigSchemaVersion) + ")");
    }

    walk(root, "");

    for (const Field& f : schema()) {
      if (seen_.count(f.path)) continue;
      if (f.required) {
        const std::string section = f.path.substr(0, f.path.rfind('.'));
        const auto it = section_line_.find(section);
        diag_.fail(it == section_line_.end() ? 1 : it->second, "missing required key '" + f.path + "'");
      }
      cfg_.defaulted.push_back(f.path);
    }
    if (!events_seen_) {
      cfg_.sequence.events = fig2_sequence(true, true, cfg_.experiment.dt).events;
      cfg_.defaulted.push_back("sequence.events");
    }

    finish();
    return std::move(cfg_);
  }

 private:
  void walk(const YAML::Node& map, const std::string& prefix) {
    for (const auto& item : map) {
      const YAML::Node& key_node = item.first;
      const std::string key = key_node.as<std::string>();
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      if (path == "schema_version") continue;
      if (!seen_keys_.insert(path).second) diag_.fail(key_node, "duplicate key '" + path + "'");

      if (const Field* f = find_field(path)) {
        read_field(*f, item.second);
        seen_.insert(path);
      } else if (path == "sequence.events") {
        read_events(item.second);
        events_seen_ = true;
      } else if (is_section(path)) {
        if (!item.second.IsMap()) diag_.fail(item.second, "section '" + path + "' must be a mapping");
        section_line_[path] = key_node.Mark().line + 1;
        walk(item.second, path);
      } else {
        reject(key_node, prefix, key, path);
      }
    }
  }

  [[noreturn]] void reject(const YAML::Node& key_node, const std::string& prefix, const std::string& key,
                           const std::string& path) const {
    const auto [base, unit] = split_unit(key);
    for (const Field& f : schema()) {
      const auto dot = f.path.rfind('.');
      const std::string f_prefix = dot == std::string::npos ? "" : f.path.substr(0, dot);
      const std::string f_key = dot == std::string::npos ? f.path : f.path.substr(dot + 1);
      if (f_prefix != prefix) continue;
      const auto [f_base, f_unit] = split_unit(f_key);
      if (f_base == base && f_unit != unit) {
        diag_.fail(key_node, "unit mismatch for '" + path + "': this key is expected as '" + f.path + "'");
      }
    }
    diag_.fail(key_node, "unknown key '" + path + "'");
  }

  const Field* find_field(const std::string& path) const {
    for (const Field& f : schema()) {
      if (f.path == path) return &f;
    }
    return nullptr;
  }

  double read_number(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) diag_.fail(node, "'" + path + "' must be a number");
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      diag_.fail(node, "'" + path + "' must be a number, got '" + node.Scalar() + "'");
    }
  }

  void read_field(const Field& f, const YAML::Node& node) {
    switch (f.kind) {
      case Kind::real: {
        const double v = read_number(node, f.path);
        if (!passes(f.check, v)) {
          diag_.fail(node, "'" + f.path + "' " + check_text(f.check) + " (got " + node.Scalar() + ")");
        }
        f.real(cfg_) = to_si(v, unit_of(f));
        break;
      }
      case Kind::count: {
        long long v = 0;
        try {
          v = node.as<long long>();
        } catch (const YAML::Exception&) {
          diag_.fail(node, "'" + f.path + "' must be an integer");
        }
        if (v < static_cast<long long>(f.min_count)) {
          diag_.fail(node, "'" + f.path + "' must be >= " + std::to_string(f.min_count) + " (got " + node.Scalar() + ")");
        }
        f.count(cfg_) = static_cast<std::size_t>(v);
        break;
      }
      case Kind::seed: {
        try {
          cfg_.master_seed = node.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
          diag_.fail(node, "'" + f.path + "' must be a non-negative integer");
        }
        break;
      }
      case Kind::text: {
        if (!node.IsScalar() || !f.set_text(cfg_, node.Scalar())) {
          diag_.fail(node, "'" + f.path + "' must be one of: " + f.choices);
        }
        break;
      }
    }
  }

  void read_events(const YAML::Node& list) {
    if (!list.IsSequence()) diag_.fail(list, "'sequence.events' must be a list");
    cfg_.sequence.events.clear();
    for (const YAML::Node& entry : list) {
      if (!entry.IsMap()) diag_.fail(entry, "each event must be a mapping");
      const YAML::Node kind_node = entry["kind"];
      if (!kind_node) diag_.fail(entry, "event is missing required key 'kind'");
      const auto kind = parse_pulse_kind(kind_node.as<std::string>());
      if (!kind) diag_.fail(kind_node, "unknown event kind '" + kind_node.as<std::string>() + "'");
      if (!entry["start_ns"]) diag_.fail(entry, "event is missing required key 'start_ns'");

      PulseEvent e;
      e.kind = *kind;
      const std::string energy_key = uses_power(e.kind) ? "power_mw" : "energy_nj";
      for (const auto& item : entry) {
        const std::string key = item.first.as<std::string>();
        const std::string path = "sequence.events." + key;
        if (key == "kind") continue;
        const double v = read_number(item.second, path);
        if (key == "start_ns") {
          e.start = to_si(v, find_unit("ns"));
        } else if (key == "duration_ns") {
          if (v < 0.0) diag_.fail(item.second, "'" + path + "' must be >= 0");
          e.duration = to_si(v, find_unit("ns"));
        } else if (key == energy_key) {
          if (v < 0.0) diag_.fail(item.second, "'" + path + "' must be >= 0");
          e.energy = to_si(v, find_unit(split_unit(key).second));
        } else if (key == "detuning_ghz") {
          e.detuning = to_si(v, find_unit("ghz"));
        } else if (key == "signal_pj" && e.kind == PulseKind::write) {
          if (v < 0.0) diag_.fail(item.second, "'" + path + "' must be >= 0");
          e.signal_energy = to_si(v, find_unit("pj"));
        } else if (key == "energy_nj" || key == "power_mw") {
          diag_.fail(item.first, "unit mismatch for '" + path + "': " + std::string(to_string(e.kind)) +
                                     " events take '" + energy_key + "'");
        } else {
          diag_.fail(item.first, "unknown key '" + path + "' for a " + std::string(to_string(e.kind)) + " event");
        }
      }
      cfg_.sequence.events.push_back(e);
    }
    events_line_ = list.Mark().line + 1;
  }

  void finish() {
    for (const std::string& name : kBeamNames) {
      BeamGeometry& b = beam_by_name(cfg_, name);
      b = make_beam(b.waist, b.transverse_offset, b.tilt_angle);
    }
    cfg_.sequence.dt = cfg_.experiment.dt;
    cfg_.experiment.ensemble.rng_seed = cfg_.master_seed;
    try {
      validate(cfg_.experiment.ensemble);
      validate(cfg_.experiment.gain);
    } catch (const ValidationError& e) {
      diag_.fail(1, e.what());
    }
    try {
      validate(cfg_.sequence);
    } catch (const ValidationError& e) {
      diag_.fail(events_line_, std::string("sequence.events: ") + e.what());
    }
  }

  Diagnostics diag_;
  RunConfig cfg_;
  std::set<std::string> seen_;
  std::set<std::string> seen_keys_;
  std::map<std::string, int> section_line_;
  bool events_seen_ = false;
  int events_line_ = 1;
};

void emit_event(std::ostringstream& out, const PulseEvent& e) {
  out << "    - {kind: " << to_string(e.kind) << ", start_ns: " << format_number(from_si(e.start, find_unit("ns")));
  if (e.kind != PulseKind::assist_on && e.kind != PulseKind::assist_off) {
    out << ", duration_ns: " << format_number(from_si(e.duration, find_unit("ns")));
  } else if (e.duration != 0.0) {
    out << ", duration_ns: " << format_number(from_si(e.duration, find_unit("ns")));
  }
  if (uses_power(e.kind)) {
    out << ", power_mw: " << format_number(from_si(e.energy, find_unit("mw")));
  } else {
    out << ", energy_nj: " << format_number(from_si(e.energy, find_unit("nj")));
  }
  out << ", detuning_ghz: " << format_number(from_si(e.detuning, find_unit("ghz")));
  if (e.kind == PulseKind::write) out << ", signal_pj: " << format_number(from_si(e.signal_energy, find_unit("pj")));
  out << "}\n";
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.experiment = reference_experiment();
  cfg.master_seed = cfg.experiment.ensemble.rng_seed;
  cfg.sequence = fig2_sequence(true, true, cfg.experiment.dt);
  return cfg;
}

RunConfig parse_config(std::string_view text, std::string_view source) { return Parser(source).parse(text); }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string echo_config(const RunConfig& cfg) {
  RunConfig c = cfg;  // field accessors take a mutable config
  std::ostringstream out;
  out << "schema_version: " << kConfigSchemaVersion << "\n";
  out << "master_seed: " << cfg.master_seed << "\n";

  std::string open;  // currently open section path
  for (const Field& f : schema()) {
    const auto dot = f.path.rfind('.');
    if (dot == std::string::npos) continue;
    const std::string section = f.path.substr(0, dot);
    const std::string key = f.path.substr(dot + 1);
    if (section != open) {
      const std::string top = section.substr(0, section.find('.'));
      const std::string open_top = open.substr(0, open.find('.'));
      if (top != open_top) out << top << ":\n";
      if (section != top) out << "  " << section.substr(top.size() + 1) << ":\n";
      open = section;
    }
    out << std::string(section == section.substr(0, section.find('.')) ? 2 : 4, ' ') << key << ": ";
    switch (f.kind) {
      case Kind::real: out << format_number(from_si(f.real(c), unit_of(f))); break;
      case Kind::count: out << f.count(c); break;
      case Kind::seed: out << cfg.master_seed; break;
      case Kind::text: out << f.get_text(cfg); break;
    }
    out << "\n";
    if (f.path == "sequence.trial_count") {
      out << "  events:\n";
      for (const PulseEvent& e : cfg.sequence.events) emit_event(out, e);
    }
  }
  return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : echo_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash_hex(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

}  // namespace spinregen
