#pragma once

#include "mfg/config.hpp"
#include "mfg/diagnostics.hpp"
#include "mfg/limit.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace mfg {

struct RunArtifacts {
  std::filesystem::path directory;
  std::vector<std::string> field_files;  // relative to directory
  std::string report_file;               // relative to directory
};

struct RunResult {
  RunArtifacts artifacts;
  nlohmann::json report;
  SolverState state;
};

nlohmann::json config_to_json(const RunConfig& config);

// Full pipeline: solve by continuation, extract switching currents and
// obstacle data, evaluate the estimate report and optional probes, write
// field files and report.json (all atomically, under a directory lock).
// Throws ConfigError, ContinuationError/NewtonError, or IoError; the CLI
// maps those to exit codes 2, 3 and 4.
RunResult run(const RunConfig& config);

// Same pipeline without touching the filesystem (used by tests).
RunResult run_in_memory(const RunConfig& config);

}  // namespace mfg
