#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "epinet/format.hpp"

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  std::string threads;
  std::string out;
};

unsigned thread_count(const std::string& flag) {
  std::string raw = flag;
  if (raw.empty()) {
    if (const char* env = std::getenv("EPINET_THREADS")) raw = env;
  }
  if (raw.empty()) return 0;
  try {
    return epinet::parse_int<unsigned>(raw);
  } catch (const std::invalid_argument&) {
    throw epinet::cli::ConfigError("threads must be a non-negative integer, got '" + raw + "'");
  }
}

}  // namespace

static const char* command_description(const std::string& name) {
  static const std::map<std::string, const char*> text{
      {"simulate", "Run replicas and write trajectories"},
      {"density", "Mean infected density over a time grid"},
      {"extinct", "Extinction time samples and survival curve"},
      {"phase", "Fast/slow phase table and exponents"},
      {"verify-lower", "Check the survival strategies against their thresholds"},
      {"verify-upper", "Check the scoring-function drift condition"},
      {"oracle", "Exact results on the joint chain (n <= 5)"},
      {"couple", "Monotone, duality or wait-and-see coupling audit"},
      {"drift", "Audit the scoring-function drift along trajectories"},
  };
  const auto it = text.find(name);
  return it == text.end() ? "" : it->second;
}

int main(int argc, char** argv) {
  using namespace epinet::cli;
  CLI::App app{"Contact process on dynamical inhomogeneous random graphs"};
  app.require_subcommand(1);
  Options opt;
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, command_description(name));
    sub->add_option("--config", opt.config_path, "Configuration file (key = value with [section] headers)");
    sub->add_option("--set", opt.overrides, "Override section.key=value (repeatable)");
    sub->add_option("--seed", opt.seed, "Master seed (overrides run.seed)");
    sub->add_option("--threads", opt.threads, "Worker threads (0 = all cores; default $EPINET_THREADS)");
    sub->add_option("--out", opt.out, "Output directory (overrides output.directory)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  ExperimentConfig config;
  unsigned threads = 0;
  try {
    Sections sections = opt.config_path.empty() ? Sections{} : load_config_file(opt.config_path);
    // All overrides land before validation, so dependent keys may be set
    // in any order.
    auto apply = [&](const std::string& dotted, const std::string& value) {
      const auto dot = dotted.find('.');
      if (dot == std::string::npos) throw ConfigError("override '" + dotted + "' must look like section.key");
      sections[dotted.substr(0, dot)][dotted.substr(dot + 1)] = value;
    };
    for (const auto& kv : opt.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + kv + "'");
      apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!opt.seed.empty()) apply("run.seed", opt.seed);
    if (!opt.out.empty()) apply("output.directory", opt.out);
    config = make_config(sections);
    threads = thread_count(opt.threads);
    for (const auto& w : config.model().warnings()) std::cerr << "warning: " << w << "\n";
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    return run_command(command, config, threads, config.get("output", "directory"), std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
