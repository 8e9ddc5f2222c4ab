#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace spde::app {

/// Process exit statuses, one per error class.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,   // usage, parse, unknown/missing key, invalid value
  kExitIo = 3,       // unreadable config, unwritable output
  kExitBlowUp = 4,   // more than half of the paths blew up (files are still written)
  kExitNumerical = 5 // singular matrix, non-convergence, degenerate regression
};

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  bool no_timestamp = false;
};

/// Loads the config and applies command-line overrides.
RunConfig prepare(const CommandOptions& opts);

int cmd_analyze(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_msd(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_order(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);

/// Runs `command` and maps every exception onto an ExitCode, printing a
/// one-line message to err.
int run_command(const std::string& command, const CommandOptions& opts, std::ostream& out,
                std::ostream& err);

}  // namespace spde::app
