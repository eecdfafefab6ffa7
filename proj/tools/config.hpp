#ifndef EPINET_TOOLS_CONFIG_HPP
#define EPINET_TOOLS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "epinet/dynamics.hpp"
#include "epinet/model.hpp"

namespace epinet::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Sections = std::map<std::string, std::map<std::string, std::string>>;

// Every section and key the runner understands, with its default value.
const Sections& config_schema();

// Flat `key = value` lines under `[section]` headers; `#` and `;` start
// comments. Unknown sections or keys throw ConfigError.
Sections parse_config_text(const std::string& text);
Sections load_config_file(const std::string& path);

// Validated configuration: the schema defaults overlaid with the parsed
// values. Two configs are equal when their normalised sections are.
struct ExperimentConfig {
  Sections values;

  const std::string& get(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::uint64_t get_uint(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;

  void set(const std::string& dotted_key, const std::string& value);

  ModelParams model() const;
  // 0-based vertices from a label list ("all" or "1,2,5").
  std::vector<Vertex> vertex_set(const std::string& section, const std::string& key) const;
  // Observation grid from [run] grid, grid_first, grid_points and t_max.
  std::vector<double> observation_times() const;
  SimConfig sim_config() const;

  bool operator==(const ExperimentConfig& other) const { return values == other.values; }
};

// Defaults overlaid with `sections`; values are checked for type and range.
ExperimentConfig make_config(const Sections& sections);

// Canonical text form; parse_config_text(echo(c)) rebuilds c exactly.
std::string echo_config(const ExperimentConfig& config);

}  // namespace epinet::cli

#endif  // EPINET_TOOLS_CONFIG_HPP
