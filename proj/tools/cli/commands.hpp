#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace mdl::cli {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitAssertion = 1,
  kExitIndeterminate = 2,
  kExitBudget = 3,
  kExitConfig = 4,
};

const std::vector<std::string>& subcommand_names();

struct RunOptions {
  bool per_pair = false;  // master-check: one row per pair instead of per q
};

// Pure computation: the report depends on cfg minus threads and out.
Report run_subcommand(const std::string& sub, const Config& cfg, const RunOptions& opt = {});

// Writes every table, the JSON report, and manifest.json into cfg.out.
void write_artifacts(const Report& r, const Config& cfg, double wall_seconds);

// Exit status for a finished report.
int exit_code(const Report& r, const Config& cfg);

// Full command line entry point.
int run_cli(int argc, char** argv);

}  // namespace mdl::cli
