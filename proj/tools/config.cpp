#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "epinet/format.hpp"

namespace epinet::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void require_one_of(const std::string& where, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return;
  throw ConfigError(where + ": unsupported value '" + v + "'");
}

}  // namespace

const Sections& config_schema() {
  static const Sections schema = {
      {"model",
       {{"n", "100"}, {"kernel", "factor"}, {"beta", "1"}, {"gamma", "0.5"}, {"eta", "0"}, {"kappa0", "1"},
        {"lambda", "0.5"}}},
      {"run",
       {{"replicas", "100"}, {"t_max", "100"}, {"max_events", "100000000"}, {"seed", "1"}, {"grid", "geometric"},
        {"grid_first", "0.01"}, {"grid_points", "60"}, {"initial", "all"}, {"star_cut", "0"},
        {"resample", "blocked"}}},
      {"sweep", {{"parameter", ""}, {"values", ""}}},
      {"output", {{"directory", "."}, {"formats", "csv,json"}}},
      {"theory",
       {{"lambdas", ""}, {"D", "0"}, {"r", "1"}, {"delta", "0.5"}, {"m_i", "1"}, {"m_ii", "1"}, {"m_iii", "1"},
        {"m_iv", "1"}, {"c_prime", "1"}, {"mode", "global"}}},
      {"phase", {{"kernels", "factor,pa"}, {"gammas", "0.25,0.5,0.75"}, {"etas", "0"}}},
      {"couple",
       {{"mode", "monotone"}, {"lambda1", "0.3"}, {"lambda2", "0.6"}, {"set_a", "1"}, {"set_b", "2"}, {"t", "2"}}},
      {"drift", {{"sampling", "geometric"}, {"every", "1"}, {"max_samples", "100000"}}},
      {"oracle", {{"times", ""}, {"dump_generator", "false"}}},
  };
  return schema;
}

Sections parse_config_text(const std::string& text) {
  const auto& schema = config_schema();
  Sections out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    if (!schema.at(section).count(key)) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
    if (out[section].count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    out[section][key] = trim(line.substr(eq + 1));
  }
  return out;
}

Sections load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

const std::string& ExperimentConfig::get(const std::string& section, const std::string& key) const {
  const auto s = values.find(section);
  if (s == values.end() || !s->second.count(key)) throw ConfigError("missing key " + section + "." + key);
  return s->second.at(key);
}

double ExperimentConfig::get_double(const std::string& section, const std::string& key) const {
  try {
    return parse_double(get(section, key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

std::int64_t ExperimentConfig::get_int(const std::string& section, const std::string& key) const {
  try {
    return parse_int<std::int64_t>(get(section, key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

std::uint64_t ExperimentConfig::get_uint(const std::string& section, const std::string& key) const {
  try {
    return parse_int<std::uint64_t>(get(section, key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

bool ExperimentConfig::get_bool(const std::string& section, const std::string& key) const {
  const auto& v = get(section, key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(section + "." + key + ": expected true or false");
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  try {
    for (const auto& s : split_list(get(section, key))) out.push_back(parse_double(s));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
  return out;
}

std::vector<std::string> ExperimentConfig::get_list(const std::string& section, const std::string& key) const {
  return split_list(get(section, key));
}

void ExperimentConfig::set(const std::string& dotted, const std::string& value) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) throw ConfigError("override '" + dotted + "' must look like section.key");
  const std::string section = dotted.substr(0, dot), key = dotted.substr(dot + 1);
  const auto& schema = config_schema();
  if (!schema.count(section) || !schema.at(section).count(key)) throw ConfigError("unknown key '" + dotted + "'");
  Sections next = values;
  next[section][key] = trim(value);
  *this = make_config(next);
}

ModelParams ExperimentConfig::model() const {
  try {
    return model_params_from_kv(values.at("model"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
}

std::vector<Vertex> ExperimentConfig::vertex_set(const std::string& section, const std::string& key) const {
  const std::int64_t n = get_int("model", "n");
  const auto& raw = get(section, key);
  std::vector<Vertex> out;
  if (raw == "all") {
    for (std::int64_t v = 0; v < n; ++v) out.push_back(static_cast<Vertex>(v));
    return out;
  }
  std::set<std::int64_t> seen;
  for (const auto& item : split_list(raw)) {
    std::int64_t label = 0;
    try {
      label = parse_int<std::int64_t>(item);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(section + "." + key + ": " + e.what());
    }
    if (label < 1 || label > n) throw ConfigError(section + "." + key + ": label " + item + " outside 1..n");
    if (seen.insert(label).second) out.push_back(static_cast<Vertex>(label - 1));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> ExperimentConfig::observation_times() const {
  const double t_max = get_double("run", "t_max");
  const double first = get_double("run", "grid_first");
  const auto points = static_cast<std::size_t>(get_int("run", "grid_points"));
  std::vector<double> times = {0.0};
  const auto rest = get("run", "grid") == "linear" ? linear_grid(t_max / static_cast<double>(points), t_max, points)
                                                   : geometric_grid(std::min(first, t_max), t_max, points);
  for (double t : rest)
    if (t > times.back()) times.push_back(t);
  return times;
}

SimConfig ExperimentConfig::sim_config() const {
  SimConfig c;
  c.t_max = get_double("run", "t_max");
  c.max_events = get_uint("run", "max_events");
  c.seed = get_uint("run", "seed");
  c.observation_times = observation_times();
  c.star_cut = get_double("run", "star_cut");
  c.resample = get("run", "resample") == "naive" ? ResampleMethod::kNaive : ResampleMethod::kBlocked;
  return c;
}

ExperimentConfig make_config(const Sections& sections) {
  ExperimentConfig c;
  c.values = config_schema();
  for (const auto& [section, kv] : sections) {
    if (!c.values.count(section)) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : kv) {
      if (!c.values[section].count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      c.values[section][key] = trim(value);
    }
  }
  // Type and range checks.
  c.model();
  if (c.get_int("run", "replicas") < 1) throw ConfigError("run.replicas must be >= 1");
  if (!(c.get_double("run", "t_max") > 0.0)) throw ConfigError("run.t_max must be > 0");
  if (c.get_int("run", "max_events") < 1) throw ConfigError("run.max_events must be >= 1");
  c.get_uint("run", "seed");
  require_one_of("run.grid", c.get("run", "grid"), {"geometric", "linear"});
  if (!(c.get_double("run", "grid_first") > 0.0)) throw ConfigError("run.grid_first must be > 0");
  if (c.get_int("run", "grid_points") < 1) throw ConfigError("run.grid_points must be >= 1");
  const double star = c.get_double("run", "star_cut");
  if (!(star >= 0.0 && star <= 1.0)) throw ConfigError("run.star_cut must lie in [0, 1]");
  require_one_of("run.resample", c.get("run", "resample"), {"blocked", "naive"});
  c.vertex_set("run", "initial");

  const auto& param = c.get("sweep", "parameter");
  if (!param.empty()) {
    require_one_of("sweep.parameter", param, {"n", "beta", "gamma", "eta", "kappa0", "lambda"});
    if (c.get_doubles("sweep", "values").empty()) throw ConfigError("sweep.values is empty");
  }
  for (const auto& f : c.get_list("output", "formats")) require_one_of("output.formats", f, {"csv", "json"});

  for (double l : c.get_doubles("theory", "lambdas"))
    if (!(l > 0.0 && l < 1.0)) throw ConfigError("theory.lambdas must lie in (0, 1)");
  if (c.get_double("theory", "D") < 0.0) throw ConfigError("theory.D must be >= 0");
  const double delta = c.get_double("theory", "delta");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("theory.delta must lie in (0, 1)");
  for (const char* k : {"r", "m_i", "m_ii", "m_iii", "m_iv", "c_prime"})
    if (!(c.get_double("theory", k) > 0.0)) throw ConfigError(std::string("theory.") + k + " must be > 0");
  require_one_of("theory.mode", c.get("theory", "mode"), {"global", "cutoff"});

  for (const auto& k : c.get_list("phase", "kernels")) require_one_of("phase.kernels", k, {"factor", "pa"});
  c.get_doubles("phase", "gammas");
  c.get_doubles("phase", "etas");

  require_one_of("couple.mode", c.get("couple", "mode"), {"monotone", "duality", "waitsee"});
  if (!(c.get_double("couple", "lambda1") >= 0.0)) throw ConfigError("couple.lambda1 must be >= 0");
  if (!(c.get_double("couple", "lambda2") >= c.get_double("couple", "lambda1")))
    throw ConfigError("couple.lambda2 must be >= couple.lambda1");
  c.vertex_set("couple", "set_a");
  c.vertex_set("couple", "set_b");
  if (!(c.get_double("couple", "t") > 0.0)) throw ConfigError("couple.t must be > 0");

  require_one_of("drift.sampling", c.get("drift", "sampling"), {"every", "geometric"});
  if (c.get_int("drift", "every") < 1) throw ConfigError("drift.every must be >= 1");
  if (c.get_int("drift", "max_samples") < 1) throw ConfigError("drift.max_samples must be >= 1");

  for (double t : c.get_doubles("oracle", "times"))
    if (!(t >= 0.0)) throw ConfigError("oracle.times must be >= 0");
  c.get_bool("oracle", "dump_generator");
  return c;
}

std::string echo_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [section, kv] : config.values) {
    if (!out.empty()) out += '\n';
    out += "[" + section + "]\n";
    for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
  }
  return out;
}

}  // namespace epinet::cli
