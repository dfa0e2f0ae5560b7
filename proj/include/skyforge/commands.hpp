#pragma once

#include <filesystem>
#include <iosfwd>

#include "skyforge/config.hpp"

namespace skyforge {

enum ExitCode : int {
  kExitOk = 0,
  kExitViolations = 1,
  kExitInvalidConfig = 2,
  kExitEstimatorFailure = 3,
  kExitEmptySkyline = 4,
  kExitCapExceeded = 5,
};

struct CommandOptions {
  std::filesystem::path config;
  Overrides overrides;
  /// Test hook for verify: empties the grid before checking it.
  bool corrupt_grid = false;
};

/// Runs the configured search and writes manifest.json, timing.json,
/// test_log.json and datasets/*.csv into the output directory.
int run_command(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Runs the configured search, then checks it against full enumeration and
/// prints the report as JSON.
int verify_command(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace skyforge
