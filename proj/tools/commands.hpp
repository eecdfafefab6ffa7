#ifndef EPINET_TOOLS_COMMANDS_HPP
#define EPINET_TOOLS_COMMANDS_HPP

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace epinet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAudit = 3;

const std::vector<std::string>& command_names();

// Runs one subcommand, writing artifacts into out_dir and a JSON summary to
// `summary`. Returns kExitOk or kExitAudit; throws ConfigError or other
// exceptions for the caller to map onto exit codes.
int run_command(const std::string& command, const ExperimentConfig& config, unsigned threads,
                const std::filesystem::path& out_dir, std::ostream& summary);

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace epinet::cli

#endif  // EPINET_TOOLS_COMMANDS_HPP
