#include "hires/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hires {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError("config: '" + key + "' expects a real number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
  return v;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream is(t);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_real(tok, "list"));
  if (out.empty()) throw ConfigError("config: empty list");
  return out;
}

ConfigMap parse_config(std::istream& in) {
  ConfigMap cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

ExperimentSpec apply_config(ExperimentSpec spec, const ConfigMap& cfg) {
  for (const auto& [key, value] : cfg) {
    if (key == "spec") {
      continue;
    } else if (key == "s") {
      spec.s_values = parse_real_list(value);
    } else if (key == "T") {
      spec.T = parse_real(value, key);
      spec.steps.reset();
    } else if (key == "steps") {
      spec.steps = static_cast<int>(parse_integer(value, key));
    } else if (key == "out") {
      spec.output_path = value;
    } else if (key == "seed") {
      spec.seed = static_cast<std::uint64_t>(parse_integer(value, key));
    } else if (key == "order") {
      const long long r = parse_integer(value, key);
      if (r != 0 && r != 1) throw ConfigError("config: order must be 0 or 1");
      spec.ode_order = static_cast<int>(r);
    } else if (key == "z0") {
      const std::vector<double> z = parse_real_list(value);
      spec.z0 = Eigen::Map<const Vec>(z.data(), static_cast<Eigen::Index>(z.size()));
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  return spec;
}

ExperimentSpec apply_overrides(ExperimentSpec spec, const ConfigOverrides& ov) {
  if (ov.s) spec.s_values = *ov.s;
  if (ov.T) {
    spec.T = *ov.T;
    spec.steps.reset();
  }
  if (ov.steps) spec.steps = *ov.steps;
  if (ov.out) spec.output_path = *ov.out;
  if (ov.seed) spec.seed = *ov.seed;
  return spec;
}

ExperimentSpec resolve_spec(const std::string& arg, const ConfigOverrides& ov) {
  const std::vector<std::string> names = builtin_names();
  if (std::find(names.begin(), names.end(), arg) != names.end()) return apply_overrides(builtin_spec(arg), ov);
  if (!std::filesystem::exists(arg)) throw ConfigError("'" + arg + "' is neither a builtin spec nor a config file");
  const ConfigMap cfg = load_config_file(arg);
  const auto it = cfg.find("spec");
  if (it == cfg.end()) throw ConfigError("config file " + arg + " lacks a 'spec' key");
  return apply_overrides(apply_config(builtin_spec(it->second), cfg), ov);
}

}  // namespace hires
