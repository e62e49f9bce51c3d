#include "mfg/canonical.hpp"

#include "mfg/diagnostics.hpp"
#include "mfg/io.hpp"
#include "mfg/limit.hpp"
#include "mfg/runner.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfg {

namespace {

const char* kFlatLog2 = R"cfg([model]
modes = 2
dim = 1
points = 16
coupling = log
potential.1 = 0
potential.2 = 0
cost.default = 1

[schedule]
lambda_steps = 11
eps_start = 0.5
eps_end = 0.001
eps_steps = 10
sigma_start = auto
sigma_end = 0

[probes]
uniqueness = true
seed = 0
)cfg";

const char* kWellsLog2 = R"cfg([model]
modes = 2
dim = 1
points = 64
coupling = log
potential.1 = 0.15*(1+cos(2*pi*x))
potential.2 = 0.15*(1+sin(2*pi*x))
cost.default = 0.1

[schedule]
lambda_steps = 11
eps_start = 0.5
eps_end = 0.001
eps_steps = 10
sigma_start = auto
sigma_end = 0

[probes]
uniqueness = true
eps_study = true
seed = 0
)cfg";

const char* kPowerBound1 = R"cfg([model]
modes = 2
dim = 1
points = 64
coupling = power
alpha = 0.5
potential.1 = 0.18*(1+cos(2*pi*x))
potential.2 = 0.18*(1+sin(2*pi*x))
cost.default = 0.2

[schedule]
lambda_steps = 11
eps_start = 0.5
eps_end = 0.001
eps_steps = 10
sigma_start = auto
sigma_end = 0

[probes]
seed = 0
)cfg";

struct Registered {
  const char* name;
  const char* description;
  const char* text;
};

const Registered kRegistry[] = {
    {"flat-log-2", "two identical flat modes, log coupling; solved exactly by the initial state",
     kFlatLog2},
    {"wells-log-2",
     "two shifted cosine/sine wells, log coupling, active switching; the main regression case",
     kWellsLog2},
    {"power-bound-1",
     "power coupling alpha=0.5 with max potential 0.36; exercises the explicit density lower "
     "bound",
     kPowerBound1},
};

}  // namespace

std::vector<std::string> list_canonical() {
  std::vector<std::string> names;
  for (const Registered& r : kRegistry) names.push_back(r.name);
  return names;
}

CanonicalConfig load_canonical(const std::string& name) {
  for (const Registered& r : kRegistry)
    if (name == r.name) return CanonicalConfig{r.name, r.description, r.text};
  throw std::out_of_range("unknown canonical config '" + name + "'");
}

std::vector<BaselineSet> load_baselines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open baselines file '" + file.string() + "'");
  nlohmann::json j = nlohmann::json::parse(in);
  std::vector<BaselineSet> sets;
  for (const auto& [config, payload] : j.at("configs").items()) {
    BaselineSet set;
    set.config = config;
    for (const auto& entry : payload.at("entries")) {
      BaselineEntry e;
      e.name = entry.at("name").get<std::string>();
      e.value = entry.at("value").get<double>();
      e.tol = entry.at("tol").get<double>();
      e.provenance = entry.value("provenance", "");
      set.entries.push_back(std::move(e));
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

void write_baselines(const std::filesystem::path& file, const std::vector<BaselineSet>& sets) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["configs"] = nlohmann::json::object();
  for (const BaselineSet& set : sets) {
    nlohmann::json entries = nlohmann::json::array();
    for (const BaselineEntry& e : set.entries)
      entries.push_back({{"name", e.name},
                         {"value", e.value},
                         {"tol", e.tol},
                         {"provenance", e.provenance}});
    j["configs"][set.config] = {{"entries", entries}};
  }
  atomic_write(file, j.dump(2) + "\n");
}

std::map<std::string, double> canonical_measurements(const std::string& name) {
  CanonicalConfig canonical = load_canonical(name);
  RunConfig cfg = canonical.parse();
  ModelSpec model = build_model(cfg);
  ContinuationSchedule schedule = build_schedule(cfg, model.grid);
  NewtonOptions opts = build_newton_options(cfg);

  ContinuationResult solve = continuation_run(model, schedule, opts);
  const double eps_final = schedule.eps_steps.back();
  const double sigma_final = schedule.sigma_steps.back();

  std::map<std::string, double> out;
  out["final_residual_sup"] = residual(model, solve.state, 1.0, eps_final, sigma_final).sup();

  EstimateReport est = estimate_report(model, solve.state, eps_final);
  out["mass_mode_1"] = est.per_mode[0].mass;
  out["total_mass"] = est.total_mass;
  double min_density = est.per_mode[0].min_density;
  for (const auto& e : est.per_mode) min_density = std::min(min_density, e.min_density);
  out["min_density"] = min_density;

  if (name == "flat-log-2") {
    double value_sup = 0.0, density_dev = 0.0;
    for (int i = 0; i < model.modes; ++i) {
      value_sup = std::max(value_sup, sup_norm(solve.state.value[i]));
      GridField dev(model.grid);
      for (std::int64_t p = 0; p < model.grid.size(); ++p)
        dev[p] = solve.state.density[i][p] - model.source;
      density_dev = std::max(density_dev, sup_norm(dev));
    }
    out["value_sup"] = value_sup;
    out["density_dev_sup"] = density_dev;
  } else {
    SwitchingCurrents currents = switching_currents(model, solve.state, eps_final);
    double total_current = 0.0;
    for (int i = 0; i < model.modes; ++i)
      for (int j = 0; j < model.modes; ++j)
        if (i != j) total_current += integrate(currents.between(i, j));
    out["switching_current_total"] = total_current;

    ObstacleReport obstacle = obstacle_residual(model, solve.state);
    out["obstacle_violation"] = obstacle.max_obstacle_violation();
    double max_gap = 0.0;
    for (double gp : complementarity_gap(model, solve.state, currents))
      max_gap = std::max(max_gap, gp);
    out["max_gap"] = max_gap;
  }
  if (name == "power-bound-1") {
    out["lower_bound"] = check_lower_bound(model, solve.state).bound;
  }
  return out;
}

std::vector<BaselineSet> regenerate_baselines() {
  std::vector<BaselineSet> sets = load_baselines(default_baselines_path());
  for (BaselineSet& set : sets) {
    std::map<std::string, double> measured = canonical_measurements(set.config);
    for (BaselineEntry& entry : set.entries) {
      auto it = measured.find(entry.name);
      if (it == measured.end())
        throw std::runtime_error("baseline entry '" + entry.name + "' of '" + set.config +
                                 "' has no measurement");
      entry.value = it->second;
    }
  }
  return sets;
}

}  // namespace mfg
