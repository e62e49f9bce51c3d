#pragma once

#include "mfg/model.hpp"
#include "mfg/solver.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfg {

struct ConfigError : std::runtime_error {
  std::vector<std::string> errors;
  explicit ConfigError(std::vector<std::string> errs)
      : std::runtime_error(errs.empty() ? "config error" : errs.front()),
        errors(std::move(errs)) {}
};

struct ModelConfig {
  int modes = 0;
  int dim = 0;
  int points = 0;
  CouplingKind coupling = CouplingKind::Log;
  double alpha = 0.5;
  PenaltyFamily penalty = PenaltyFamily::Cubic;
  double source = 1.0;
  std::vector<std::string> potential;          // one entry per mode
  std::string cost_default;                    // empty means per-pair only
  std::map<std::pair<int, int>, std::string> cost_pairs;  // 1-based (from, to)
};

struct ScheduleConfig {
  int lambda_count = 11;
  double eps_start = 0.5;
  double eps_end = 1e-3;
  int eps_count = 10;
  double sigma_start = -1.0;  // negative means auto (= grid spacing)
  double sigma_end = 0.0;
};

struct SolverConfig {
  double tol = 1e-10;
  int max_iter = 50;
  double density_floor = 1e-10;
};

struct OutputConfig {
  std::string dir = "out";
  bool fields = true;
  bool binary = false;
};

struct ProbesConfig {
  bool uniqueness = false;
  bool eps_study = false;
  bool oracle = false;
  int oracle_max_unknowns = 1024;
  std::uint64_t seed = 0;
};

struct RunConfig {
  ModelConfig model;
  ScheduleConfig schedule;
  SolverConfig solver;
  OutputConfig output;
  ProbesConfig probes;
};

// Parses and fully validates a run configuration: syntax errors, unknown
// sections or keys, malformed values, and model-assumption violations are
// all collected (with line references where available) into one ConfigError.
// Overrides are "section.key=value" strings applied on top of the file.
RunConfig parse_config(const std::string& text,
                       const std::vector<std::string>& overrides = {});

ModelSpec build_model(const RunConfig& config);
ContinuationSchedule build_schedule(const RunConfig& config, const PeriodicGrid& grid);
NewtonOptions build_newton_options(const RunConfig& config);

// Canonical text rendering; parse_config(render_config(c)) reproduces c.
std::string render_config(const RunConfig& config);

}  // namespace mfg
