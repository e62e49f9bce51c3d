#include "mfg/runner.hpp"

#include "mfg/io.hpp"
#include "mfg/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mfg {

namespace {

using nlohmann::json;

json estimates_to_json(const EstimateReport& rep) {
  json out;
  out["per_mode"] = json::array();
  for (const ModeEstimates& e : rep.per_mode) {
    out["per_mode"].push_back({{"mass", e.mass},
                               {"coupling_energy", e.coupling_energy},
                               {"mean_value", e.mean_value},
                               {"kinetic_energy", e.kinetic_energy},
                               {"penalty_budget", e.penalty_budget},
                               {"gradient_energy", e.gradient_energy},
                               {"hessian_energy", e.hessian_energy},
                               {"fisher_energy", e.fisher_energy},
                               {"min_density", e.min_density},
                               {"density_w12", e.density_w12},
                               {"value_w22", e.value_w22},
                               {"oscillation", e.oscillation}});
  }
  out["total_mass"] = rep.total_mass;
  out["energy_lhs"] = rep.energy_lhs;
  out["energy_rhs"] = rep.energy_rhs;
  out["energy_ok"] = rep.energy_lhs <= rep.energy_rhs + 1e-6;
  return out;
}

json steps_to_json(const SolveReport& rep) {
  json steps = json::array();
  for (const StepReport& s : rep.steps) {
    steps.push_back({{"lambda", s.lambda},
                     {"eps", s.eps},
                     {"sigma", s.sigma},
                     {"iterations", s.iterations},
                     {"residual_history", s.residual_history},
                     {"damping_events", s.damping_events},
                     {"bisected", s.bisected}});
  }
  return steps;
}

SolverState perturbed_state(const ModelSpec& model, const SolverState& base, Rng& rng,
                            double amplitude, double floor) {
  SolverState out = base;
  for (int i = 0; i < model.modes; ++i) {
    for (std::int64_t p = 0; p < model.grid.size(); ++p) {
      out.value[i][p] += amplitude * rng.symmetric();
      out.density[i][p] *= 1.0 + amplitude * rng.symmetric();
      out.density[i][p] = std::max(out.density[i][p], 10.0 * floor);
    }
  }
  return out;
}

}  // namespace

json config_to_json(const RunConfig& cfg) {
  json j;
  j["model"] = {{"modes", cfg.model.modes},
                {"dim", cfg.model.dim},
                {"points", cfg.model.points},
                {"coupling", cfg.model.coupling == CouplingKind::Log ? "log" : "power"},
                {"penalty", cfg.model.penalty == PenaltyFamily::Cubic       ? "cubic"
                            : cfg.model.penalty == PenaltyFamily::Quadratic ? "quadratic"
                                                                            : "exponential"},
                {"source", cfg.model.source},
                {"potential", cfg.model.potential}};
  if (cfg.model.coupling == CouplingKind::Power) j["model"]["alpha"] = cfg.model.alpha;
  if (!cfg.model.cost_default.empty()) j["model"]["cost_default"] = cfg.model.cost_default;
  if (!cfg.model.cost_pairs.empty()) {
    json pairs = json::array();
    for (const auto& [pair, value] : cfg.model.cost_pairs)
      pairs.push_back({{"from", pair.first}, {"to", pair.second}, {"cost", value}});
    j["model"]["cost_pairs"] = pairs;
  }
  j["schedule"] = {{"lambda_steps", cfg.schedule.lambda_count},
                   {"eps_start", cfg.schedule.eps_start},
                   {"eps_end", cfg.schedule.eps_end},
                   {"eps_steps", cfg.schedule.eps_count},
                   {"sigma_start", cfg.schedule.sigma_start},
                   {"sigma_end", cfg.schedule.sigma_end}};
  j["solver"] = {{"tol", cfg.solver.tol},
                 {"max_iter", cfg.solver.max_iter},
                 {"theta_floor", cfg.solver.density_floor}};
  j["output"] = {{"dir", cfg.output.dir},
                 {"fields", cfg.output.fields},
                 {"binary", cfg.output.binary}};
  j["probes"] = {{"uniqueness", cfg.probes.uniqueness},
                 {"eps_study", cfg.probes.eps_study},
                 {"oracle", cfg.probes.oracle},
                 {"oracle_max_unknowns", cfg.probes.oracle_max_unknowns},
                 {"seed", cfg.probes.seed}};
  return j;
}

RunResult run_in_memory(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();

  ModelSpec model = build_model(cfg);
  ValidationReport validation = validate(model);
  if (!validation.ok()) {
    std::vector<std::string> errors;
    for (const auto& c : validation.checks)
      if (c.status == ValidationCheck::Status::Fail)
        errors.push_back(c.name + ": " + c.detail);
    throw ConfigError(errors);
  }

  ContinuationSchedule schedule = build_schedule(cfg, model.grid);
  NewtonOptions opts = build_newton_options(cfg);

  const bool want_trajectory = cfg.probes.eps_study;
  ContinuationResult solve = continuation_run(model, schedule, opts, want_trajectory);

  const double eps_final = schedule.eps_steps.back();
  const double sigma_final = schedule.sigma_steps.back();

  SystemResidual final_res = residual(model, solve.state, 1.0, eps_final, sigma_final);
  SwitchingCurrents currents = switching_currents(model, solve.state, eps_final);
  ObstacleReport obstacle = obstacle_residual(model, solve.state);
  std::vector<double> gaps = complementarity_gap(model, solve.state, currents);
  EstimateReport estimates = estimate_report(model, solve.state, eps_final);
  LowerBoundCheck lower = check_lower_bound(model, solve.state);

  RunResult result;
  result.state = solve.state;

  json& rep = result.report;
  rep["schema_version"] = 1;
  rep["generator"] = "wcmfg";
  rep["config"] = config_to_json(cfg);

  json validation_json = json::array();
  for (const auto& c : validation.checks) {
    validation_json.push_back(
        {{"name", c.name},
         {"status", c.status == ValidationCheck::Status::Pass        ? "pass"
                    : c.status == ValidationCheck::Status::Fail      ? "fail"
                                                                     : "not-enforced"},
         {"detail", c.detail}});
  }
  rep["validation"] = validation_json;

  rep["solve"] = {{"steps", steps_to_json(solve.report)},
                  {"final_residual_sup", final_res.sup()},
                  {"final_eps", eps_final},
                  {"final_sigma", sigma_final},
                  {"eps_iteration_warning", solve.report.eps_iteration_warning},
                  {"note", solve.report.note}};

  rep["estimates"] = estimates_to_json(estimates);

  {
    json obs;
    obs["hj_violation"] = obstacle.hj_violation;
    obs["max_form_sup"] = obstacle.max_form_sup;
    json viol = json::array();
    json gap = json::array();
    json total = json::array();
    for (int i = 0; i < model.modes; ++i) {
      json vrow = json::array(), grow = json::array(), trow = json::array();
      for (int j = 0; j < model.modes; ++j) {
        vrow.push_back(obstacle.obstacle_violation[static_cast<std::size_t>(i) * model.modes + j]);
        grow.push_back(gaps[static_cast<std::size_t>(i) * model.modes + j]);
        trow.push_back(i == j ? 0.0 : integrate(currents.between(i, j)));
      }
      viol.push_back(vrow);
      gap.push_back(grow);
      total.push_back(trow);
    }
    obs["obstacle_violation"] = viol;
    obs["complementarity_gap"] = gap;
    rep["obstacle"] = obs;
    rep["currents"] = {{"total", total}};
  }

  rep["lower_bound"] = {{"bound", lower.bound},
                        {"min_density", lower.min_density},
                        {"pass", lower.pass},
                        {"explicit", lower.explicit_bound}};

  json probes;
  probes["seed"] = cfg.probes.seed;
  if (cfg.probes.uniqueness) {
    Rng rng_a(cfg.probes.seed), rng_b(cfg.probes.seed + 1);
    SolverState start_a = perturbed_state(model, solve.state, rng_a, 0.1, opts.density_floor);
    SolverState start_b = perturbed_state(model, solve.state, rng_b, 0.1, opts.density_floor);
    auto [state_a, rep_a] = newton_solve(model, start_a, 1.0, eps_final, sigma_final, opts);
    auto [state_b, rep_b] = newton_solve(model, start_b, 1.0, eps_final, sigma_final, opts);
    double diff = 0.0;
    for (int i = 0; i < model.modes; ++i) {
      GridField dv(model.grid), dth(model.grid);
      for (std::int64_t p = 0; p < model.grid.size(); ++p) {
        dv[p] = state_a.value[i][p] - state_b.value[i][p];
        dth[p] = state_a.density[i][p] - state_b.density[i][p];
      }
      diff = std::max({diff, sup_norm(dv), sup_norm(dth)});
    }
    MonotonicityGap gap = monotonicity_gap(model, state_a, state_b);
    probes["uniqueness"] = {{"state_diff_sup", diff},
                            {"coupling_gap", gap.coupling_term},
                            {"gradient_gap", gap.gradient_term},
                            {"iterations_a", rep_a.iterations},
                            {"iterations_b", rep_b.iterations}};
  }
  if (cfg.probes.oracle) {
    const std::int64_t unknowns = 2 * static_cast<std::int64_t>(model.modes) * model.grid.size();
    if (unknowns <= std::min<std::int64_t>(1024, cfg.probes.oracle_max_unknowns)) {
      SolverState oracle =
          oracle_solve(model, 1.0, eps_final, sigma_final, opts, solve.state);
      double diff = 0.0;
      for (int i = 0; i < model.modes; ++i) {
        GridField dv(model.grid), dth(model.grid);
        for (std::int64_t p = 0; p < model.grid.size(); ++p) {
          dv[p] = oracle.value[i][p] - solve.state.value[i][p];
          dth[p] = oracle.density[i][p] - solve.state.density[i][p];
        }
        diff = std::max({diff, sup_norm(dv), sup_norm(dth)});
      }
      probes["oracle"] = {{"state_diff_sup", diff}, {"unknowns", unknowns}};
    } else {
      probes["oracle"] = {{"skipped", "instance exceeds oracle size guard"},
                          {"unknowns", unknowns}};
    }
  }
  if (cfg.probes.eps_study) {
    std::vector<EpsStudyRow> rows = eps_study_from_trajectory(model, solve.trajectory);
    json table = json::array();
    for (const EpsStudyRow& r : rows) {
      table.push_back({{"eps_coarse", r.eps_coarse},
                       {"eps_fine", r.eps_fine},
                       {"value_diff_sup", r.value_diff_sup},
                       {"density_diff_l2", r.density_diff_l2},
                       {"obstacle_violation", r.obstacle_violation},
                       {"max_gap", r.max_gap}});
    }
    probes["eps_study"] = table;
  }
  rep["probes"] = probes;

  // Timing data lives in its own subtree; report determinism is defined
  // modulo this block.
  double solve_seconds = 0.0;
  for (const StepReport& s : solve.report.steps) solve_seconds += s.wall_seconds;
  rep["timings"] = {{"solve_seconds", solve_seconds},
                    {"total_seconds",
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  return result;
}

RunResult run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output.dir;
  DirectoryLock lock(dir);

  RunResult result = run_in_memory(cfg);
  result.artifacts.directory = dir;

  json fields;
  if (cfg.output.fields) {
    const int d = cfg.model.modes;
    json value_files = json::array(), density_files = json::array(), obstacle_files = json::array();
    ModelSpec model = build_model(cfg);
    SwitchingCurrents currents = switching_currents(
        model, result.state, result.report["solve"]["final_eps"].get<double>());
    ObstacleReport obstacle = obstacle_residual(model, result.state);
    for (int i = 0; i < d; ++i) {
      const std::string vf = "value_" + std::to_string(i + 1) + ".csv";
      const std::string tf = "density_" + std::to_string(i + 1) + ".csv";
      const std::string of = "obstacle_" + std::to_string(i + 1) + ".csv";
      write_field_csv(dir / vf, result.state.value[i]);
      write_field_csv(dir / tf, result.state.density[i]);
      write_field_csv(dir / of, obstacle.max_form[i]);
      value_files.push_back(vf);
      density_files.push_back(tf);
      obstacle_files.push_back(of);
      result.artifacts.field_files.insert(result.artifacts.field_files.end(), {vf, tf, of});
    }
    json current_files = json::array();
    for (int i = 0; i < d; ++i) {
      json row = json::array();
      for (int j = 0; j < d; ++j) {
        if (i == j) {
          row.push_back("");
          continue;
        }
        const std::string cf =
            "current_" + std::to_string(i + 1) + "_" + std::to_string(j + 1) + ".csv";
        write_field_csv(dir / cf, currents.between(i, j));
        row.push_back(cf);
        result.artifacts.field_files.push_back(cf);
      }
      current_files.push_back(row);
    }
    fields = {{"value", value_files},
              {"density", density_files},
              {"obstacle", obstacle_files},
              {"current", current_files}};
    if (cfg.output.binary) {
      write_fields_binary(dir / "value.bin", result.state.value);
      write_fields_binary(dir / "density.bin", result.state.density);
      fields["binary"] = {"value.bin", "density.bin"};
      result.artifacts.field_files.insert(result.artifacts.field_files.end(),
                                          {"value.bin", "density.bin"});
    }
  }
  result.report["fields"] = fields;

  result.artifacts.report_file = "report.json";
  atomic_write(dir / "report.json", result.report.dump(2) + "\n");
  return result;
}

}  // namespace mfg
