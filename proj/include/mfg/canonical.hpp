#pragma once

#include "mfg/config.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mfg {

// Named, version-pinned test configurations. The registry strings are the
// source of truth; data/ carries the same files for direct CLI use and the
// runner test asserts they stay in sync.
struct CanonicalConfig {
  std::string name;
  std::string description;
  std::string config_text;

  RunConfig parse() const { return parse_config(config_text); }
};

std::vector<std::string> list_canonical();
CanonicalConfig load_canonical(const std::string& name);  // throws std::out_of_range

// Frozen expected values with tolerance and provenance, regenerated by the
// `regen-baselines` subcommand and checked by the regression tests.
struct BaselineEntry {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  std::string provenance;
};

struct BaselineSet {
  std::string config;
  std::vector<BaselineEntry> entries;
};

std::vector<BaselineSet> load_baselines(const std::filesystem::path& file);
void write_baselines(const std::filesystem::path& file, const std::vector<BaselineSet>& sets);

// Current measured values for one canonical configuration (runs the solver).
std::map<std::string, double> canonical_measurements(const std::string& name);

// Recomputes every baseline value, keeping the pinned tolerances and
// provenance strings. Returns the refreshed sets.
std::vector<BaselineSet> regenerate_baselines();

inline std::filesystem::path default_baselines_path() {
  return std::filesystem::path(MFG_DATA_DIR) / "baselines.json";
}

}  // namespace mfg
