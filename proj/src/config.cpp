#include "hhdr/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hhdr {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

// unit table per dimension: suffix -> scale to SI / Hz / s / m / rad
const std::map<std::string, double>& units_for(Dimension dim) {
  static const std::map<std::string, double> tesla = {{"T", 1.0}, {"mT", 1e-3}, {"G", 1e-4}};
  static const std::map<std::string, double> freq = {
      {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  static const std::map<std::string, double> time = {
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
  static const std::map<std::string, double> length = {
      {"m", 1.0}, {"nm", 1e-9}, {"A", 1e-10}, {"pm", 1e-12}};
  static const std::map<std::string, double> angle = {{"rad", 1.0}, {"deg", M_PI / 180.0}};
  static const std::map<std::string, double> none = {};
  switch (dim) {
    case Dimension::tesla: return tesla;
    case Dimension::frequency: return freq;
    case Dimension::time: return time;
    case Dimension::length: return length;
    case Dimension::angle: return angle;
    default: return none;
  }
}

double parse_quantity_at(const std::string& text, Dimension dim, int line) {
  std::istringstream in(trim(text));
  double value = 0;
  if (!(in >> value)) fail(line, "expected a number in '" + text + "'");
  std::string unit;
  in >> unit;
  std::string rest;
  if (in >> rest) fail(line, "trailing content in '" + text + "'");
  if (dim == Dimension::none) {
    if (!unit.empty()) fail(line, "value '" + text + "' must be dimensionless");
    return value;
  }
  const auto& table = units_for(dim);
  auto it = table.find(unit);
  if (it == table.end())
    fail(line, unit.empty() ? "missing unit in '" + text + "'"
                            : "unknown unit '" + unit + "' in '" + text + "'");
  return value * it->second;
}

long long parse_integer(const std::string& text, int line) {
  std::istringstream in(trim(text));
  long long v = 0;
  if (!(in >> v)) fail(line, "expected an integer in '" + text + "'");
  std::string rest;
  if (in >> rest) fail(line, "trailing content in '" + text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text, int line) {
  std::istringstream in(trim(text));
  std::uint64_t v = 0;
  if (!(in >> v)) fail(line, "expected an unsigned integer in '" + text + "'");
  std::string rest;
  if (in >> rest) fail(line, "trailing content in '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, int line) {
  std::string t = trim(text);
  if (t == "true" || t == "on" || t == "1") return true;
  if (t == "false" || t == "off" || t == "0") return false;
  fail(line, "expected a boolean in '" + text + "'");
}

// whitespace-separated list of plain numbers
std::vector<double> parse_number_list(const std::string& text, int line) {
  std::istringstream in(trim(text));
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) fail(line, "expected a number list in '" + text + "'");
  return out;
}

Vec3 parse_vec3(const std::string& text, Dimension dim, int line) {
  std::vector<std::string> parts;
  std::istringstream in(trim(text));
  std::string tok;
  while (in >> tok) parts.push_back(tok);
  // either "x y z" dimensionless or "x y z unit"
  if (dim == Dimension::none) {
    if (parts.size() != 3) fail(line, "expected three components in '" + text + "'");
    return Vec3(parse_quantity_at(parts[0], Dimension::none, line),
                parse_quantity_at(parts[1], Dimension::none, line),
                parse_quantity_at(parts[2], Dimension::none, line));
  }
  if (parts.size() != 4) fail(line, "expected 'x y z unit' in '" + text + "'");
  double scale = parse_quantity_at("1 " + parts[3], dim, line);
  return scale * Vec3(parse_quantity_at(parts[0], Dimension::none, line),
                      parse_quantity_at(parts[1], Dimension::none, line),
                      parse_quantity_at(parts[2], Dimension::none, line));
}

}  // namespace

double parse_quantity(const std::string& text, Dimension dim) {
  return parse_quantity_at(text, dim, 0);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.raw = text;

  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  int line = 0;
  while (std::getline(in, raw_line)) {
    ++line;
    std::string s = raw_line;
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "field" && section != "drive" && section != "sequence" &&
          section != "bath" && section != "analysis" && section != "output")
        fail(line, "unknown section [" + section + "]");
      continue;
    }

    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value' in '" + s + "'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (val.empty()) fail(line, "empty value for '" + key + "'");
    if (section.empty()) fail(line, "key '" + key + "' outside any section");

    if (section == "field") {
      if (key == "b") cfg.b_mag = parse_quantity_at(val, Dimension::tesla, line);
      else if (key == "nv_axis") cfg.nv_axis = parse_vec3(val, Dimension::none, line).normalized();
      else fail(line, "unknown key '" + key + "' in [field]");
    } else if (section == "drive") {
      if (key == "omega") cfg.omega = parse_quantity_at(val, Dimension::frequency, line);
      else if (key == "omega_start")
        cfg.omega_start = parse_quantity_at(val, Dimension::frequency, line);
      else if (key == "omega_stop")
        cfg.omega_stop = parse_quantity_at(val, Dimension::frequency, line);
      else if (key == "omega_count")
        cfg.omega_count = static_cast<int>(parse_integer(val, line));
      else if (key == "phase") cfg.phase = parse_quantity_at(val, Dimension::angle, line);
      else fail(line, "unknown key '" + key + "' in [drive]");
    } else if (section == "sequence") {
      if (key == "type") {
        if (val != "alternating" && val != "spin-lock" && val != "ramsey")
          fail(line, "unknown sequence type '" + val + "'");
        cfg.type = val;
      } else if (key == "tau") cfg.tau = parse_quantity_at(val, Dimension::time, line);
      else if (key == "tau_start") cfg.tau_start = parse_quantity_at(val, Dimension::time, line);
      else if (key == "tau_stop") cfg.tau_stop = parse_quantity_at(val, Dimension::time, line);
      else if (key == "tau_count") cfg.tau_count = static_cast<int>(parse_integer(val, line));
      else if (key == "n_plus") cfg.n_plus = static_cast<int>(parse_integer(val, line));
      else if (key == "n_minus") cfg.n_minus = static_cast<int>(parse_integer(val, line));
      else if (key == "interleave") {
        if (val != "alternating" && val != "plus-first")
          fail(line, "unknown interleave mode '" + val + "'");
        cfg.interleave = val;
      } else if (key == "snapshots") {
        for (double v : parse_number_list(val, line)) {
          if (v < 0 || v != std::floor(v)) fail(line, "snapshots must be non-negative integers");
          cfg.snapshots.push_back(static_cast<int>(v));
        }
      } else fail(line, "unknown key '" + key + "' in [sequence]");
    } else if (section == "bath") {
      if (key == "enabled") cfg.bath_enabled = parse_bool(val, line);
      else if (key == "abundance") cfg.abundance = parse_quantity_at(val, Dimension::none, line);
      else if (key == "radius") cfg.radius = parse_quantity_at(val, Dimension::length, line);
      else if (key == "min_distance")
        cfg.min_distance = parse_quantity_at(val, Dimension::length, line);
      else if (key == "seed") cfg.seed = parse_u64(val, line);
      else if (key == "target_count")
        cfg.target_count = static_cast<int>(parse_integer(val, line));
      else if (key == "engine_max") cfg.engine_max = static_cast<int>(parse_integer(val, line));
      else if (key == "nucleus") {
        // "coupling alpha": e.g. "220 kHz 56 deg"
        std::istringstream nv(val);
        std::string c1, c2, a1, a2;
        if (!(nv >> c1 >> c2 >> a1 >> a2)) fail(line, "nucleus needs 'coupling angle'");
        std::string rest;
        if (nv >> rest) fail(line, "trailing content in nucleus spec");
        NucleusSpec spec;
        spec.coupling = parse_quantity_at(c1 + " " + c2, Dimension::frequency, line);
        spec.alpha = parse_quantity_at(a1 + " " + a2, Dimension::angle, line);
        cfg.nuclei.push_back(spec);
      } else if (key == "nucleus_pos") {
        NucleusSpec spec;
        spec.by_position = true;
        spec.position = parse_vec3(val, Dimension::length, line);
        cfg.nuclei.push_back(spec);
      } else fail(line, "unknown key '" + key + "' in [bath]");
    } else if (section == "analysis") {
      if (key == "zero_pad") cfg.zero_pad = static_cast<int>(parse_integer(val, line));
      else if (key == "detuning") cfg.detuning = parse_quantity_at(val, Dimension::frequency, line);
      else if (key == "drift_broadening")
        cfg.drift_broadening = parse_quantity_at(val, Dimension::frequency, line);
      else if (key == "fid_dt") cfg.fid_dt = parse_quantity_at(val, Dimension::time, line);
      else if (key == "fid_count") cfg.fid_count = static_cast<int>(parse_integer(val, line));
      else if (key == "bias_values") cfg.bias_values = parse_number_list(val, line);
      else if (key == "interrogation_time")
        cfg.interrogation_time = parse_quantity_at(val, Dimension::time, line);
      else if (key == "omega_opt")
        cfg.omega_opt_meas = parse_quantity_at(val, Dimension::frequency, line);
      else if (key == "j") cfg.j_meas = parse_quantity_at(val, Dimension::frequency, line);
      else fail(line, "unknown key '" + key + "' in [analysis]");
    } else if (section == "output") {
      if (key == "basename") cfg.basename = val;
      else fail(line, "unknown key '" + key + "' in [output]");
    }
  }

  // cross-field sanity
  if (cfg.b_mag <= 0) throw ConfigError("config: field magnitude must be positive");
  if (cfg.zero_pad < 1) throw ConfigError("config: zero_pad must be >= 1");
  if (cfg.fid_count < 2) throw ConfigError("config: fid_count must be >= 2");
  if (cfg.fid_dt <= 0) throw ConfigError("config: fid_dt must be positive");
  if (cfg.omega_count && *cfg.omega_count < 1)
    throw ConfigError("config: omega_count must be >= 1");
  if (cfg.tau_count && *cfg.tau_count < 1) throw ConfigError("config: tau_count must be >= 1");
  if (cfg.n_plus < 0 || cfg.n_minus < 0) throw ConfigError("config: negative sweep count");
  if (cfg.engine_max < 0) throw ConfigError("config: engine_max must be >= 0");
  for (double b : cfg.bias_values)
    if (b < -1 || b > 1) throw ConfigError("config: bias values must lie in [-1, 1]");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace hhdr
