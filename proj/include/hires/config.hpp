#pragma once

#include "hires/experiments.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hires {

using ConfigMap = std::map<std::string, std::string>;

// key = value lines; blank lines and lines starting with '#' are skipped.
ConfigMap parse_config(std::istream& in);
ConfigMap load_config_file(const std::string& path);

// Command-line flag overrides; set fields win over file values.
struct ConfigOverrides {
  std::optional<std::vector<double>> s;
  std::optional<double> T;
  std::optional<int> steps;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

// Recognized keys: spec (builtin to start from), s, T, steps, out, seed, order, z0.
ExperimentSpec apply_config(ExperimentSpec base, const ConfigMap& cfg);
ExperimentSpec apply_overrides(ExperimentSpec spec, const ConfigOverrides& ov);

// arg is a builtin name or the path of a config file with a `spec` key.
ExperimentSpec resolve_spec(const std::string& arg, const ConfigOverrides& ov);

std::vector<double> parse_real_list(const std::string& text);

}  // namespace hires
