// Batch front end for the weakly coupled mean-field game solver.
// Exit codes: 0 success, 2 config/validation error, 3 solver nonconvergence,
// 4 I/O error.

#include "mfg/canonical.hpp"
#include "mfg/config.hpp"
#include "mfg/io.hpp"
#include "mfg/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mfg::IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_failure(const std::string& kind, const std::string& message) {
  json j;
  j["failure"] = {{"kind", kind}, {"message", message}};
  std::cout << j.dump(2) << "\n";
}

std::string resolve_output_dir(const std::string& configured, const std::string& cli_override) {
  if (!cli_override.empty()) return cli_override;
  fs::path dir = configured;
  if (dir.is_relative()) {
    if (const char* root = std::getenv("WCMFG_OUTPUT_ROOT")) return (fs::path(root) / dir).string();
  }
  return dir.string();
}

mfg::RunConfig load_run_config(const std::string& config_path, std::vector<std::string> overrides,
                               const std::string& output_dir, const std::string& eps_min) {
  if (!eps_min.empty()) overrides.push_back("schedule.eps_end=" + eps_min);
  mfg::RunConfig cfg = mfg::parse_config(read_file(config_path), overrides);
  cfg.output.dir = resolve_output_dir(cfg.output.dir, output_dir);
  return cfg;
}

int run_solve(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& output_dir, const std::string& eps_min, bool force_eps_study) {
  mfg::RunConfig cfg;
  try {
    std::vector<std::string> ov = overrides;
    if (force_eps_study) ov.push_back("probes.eps_study=true");
    cfg = load_run_config(config_path, ov, output_dir, eps_min);
  } catch (const mfg::ConfigError& err) {
    for (const auto& e : err.errors) std::cerr << "config error: " << e << "\n";
    return kExitConfig;
  } catch (const mfg::IoError& err) {
    std::cerr << "io error: " << err.what() << "\n";
    return kExitIo;
  }

  try {
    mfg::RunResult result = mfg::run(cfg);
    const json& rep = result.report;
    std::cout << "wrote " << (result.artifacts.directory / result.artifacts.report_file).string()
              << "\n";
    std::cout << "final residual sup: " << rep["solve"]["final_residual_sup"].get<double>()
              << " at eps = " << rep["solve"]["final_eps"].get<double>() << "\n";
    std::cout << "total mass: " << rep["estimates"]["total_mass"].get<double>() << "\n";
    if (rep["probes"].contains("eps_study")) {
      std::cout << "eps study (coarse -> fine, |du|_inf, |dtheta|_L2, obstacle, gap):\n";
      for (const auto& row : rep["probes"]["eps_study"]) {
        std::cout << "  " << row["eps_coarse"].get<double>() << " -> "
                  << row["eps_fine"].get<double>() << "  " << row["value_diff_sup"].get<double>()
                  << "  " << row["density_diff_l2"].get<double>() << "  "
                  << row["obstacle_violation"].get<double>() << "  "
                  << row["max_gap"].get<double>() << "\n";
      }
    }
    return 0;
  } catch (const mfg::ContinuationError& err) {
    print_failure("nonconvergence", err.what());
    return kExitSolver;
  } catch (const mfg::NewtonError& err) {
    print_failure("nonconvergence", err.what());
    return kExitSolver;
  } catch (const mfg::IoError& err) {
    print_failure("io", err.what());
    return kExitIo;
  }
}

int run_validate(const std::string& config_path, const std::vector<std::string>& overrides) {
  std::string text;
  try {
    text = read_file(config_path);
  } catch (const mfg::IoError& err) {
    std::cerr << "io error: " << err.what() << "\n";
    return kExitIo;
  }
  try {
    mfg::RunConfig cfg = mfg::parse_config(text, overrides);
    mfg::ModelSpec model = mfg::build_model(cfg);
    mfg::ValidationReport report = mfg::validate(model);
    for (const auto& check : report.checks) {
      const char* status = check.status == mfg::ValidationCheck::Status::Pass ? "pass"
                           : check.status == mfg::ValidationCheck::Status::Fail
                               ? "FAIL"
                               : "not-enforced";
      std::cout << status << "  " << check.name << ": " << check.detail << "\n";
    }
    std::cout << (report.ok() ? "configuration valid\n" : "configuration invalid\n");
    return report.ok() ? 0 : kExitConfig;
  } catch (const mfg::ConfigError& err) {
    for (const auto& e : err.errors) std::cerr << "config error: " << e << "\n";
    return kExitConfig;
  }
}

int run_report(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) {
    std::cerr << "io error: cannot open '" << report_path << "'\n";
    return kExitIo;
  }
  json rep;
  try {
    rep = json::parse(in);
  } catch (const json::exception& err) {
    std::cerr << "io error: not a report file: " << err.what() << "\n";
    return kExitIo;
  }
  const json& cfg = rep["config"];
  std::cout << "run of " << cfg["model"]["modes"] << " modes on T^" << cfg["model"]["dim"]
            << ", n = " << cfg["model"]["points"] << ", coupling "
            << cfg["model"]["coupling"].get<std::string>() << "\n";
  std::cout << "continuation steps (lambda, eps, sigma, iterations):\n";
  for (const auto& s : rep["solve"]["steps"])
    std::cout << "  " << s["lambda"].get<double>() << "  " << s["eps"].get<double>() << "  "
              << s["sigma"].get<double>() << "  " << s["iterations"].get<int>()
              << (s["bisected"].get<bool>() ? "  (bisected)" : "") << "\n";
  std::cout << "final residual sup: " << rep["solve"]["final_residual_sup"].get<double>() << "\n";
  std::cout << "per-mode estimates (mass, min density, W12(theta), W22(u)):\n";
  int mode = 1;
  for (const auto& e : rep["estimates"]["per_mode"])
    std::cout << "  mode " << mode++ << ": " << e["mass"].get<double>() << "  "
              << e["min_density"].get<double>() << "  " << e["density_w12"].get<double>() << "  "
              << e["value_w22"].get<double>() << "\n";
  std::cout << "obstacle violation: ";
  for (const auto& row : rep["obstacle"]["obstacle_violation"]) {
    for (const auto& v : row) std::cout << v.get<double>() << " ";
  }
  std::cout << "\n";
  if (rep["probes"].contains("uniqueness")) {
    const auto& u = rep["probes"]["uniqueness"];
    std::cout << "uniqueness probe: state diff " << u["state_diff_sup"].get<double>()
              << ", coupling gap " << u["coupling_gap"].get<double>() << "\n";
  }
  return 0;
}

int run_regen(const std::string& file, bool write) {
  const fs::path path = file.empty() ? mfg::default_baselines_path() : fs::path(file);
  try {
    std::vector<mfg::BaselineSet> old_sets = mfg::load_baselines(path);
    std::vector<mfg::BaselineSet> fresh = mfg::regenerate_baselines();
    bool drift = false;
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      for (std::size_t e = 0; e < fresh[k].entries.size(); ++e) {
        const auto& nw = fresh[k].entries[e];
        const auto& od = old_sets[k].entries[e];
        const double delta = std::abs(nw.value - od.value);
        const bool outside = delta > od.tol;
        drift = drift || outside;
        std::cout << (outside ? "DRIFT " : "ok    ") << fresh[k].config << "/" << nw.name << ": "
                  << od.value << " -> " << nw.value << " (|delta| = " << delta
                  << ", tol = " << od.tol << ")\n";
      }
    }
    if (write) {
      mfg::write_baselines(path, fresh);
      std::cout << "baselines written to " << path.string() << "\n";
    } else {
      std::cout << "dry run (pass --write to update " << path.string() << ")\n";
    }
    return drift && !write ? 1 : 0;
  } catch (const mfg::IoError& err) {
    std::cerr << "io error: " << err.what() << "\n";
    return kExitIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stationary weakly coupled mean-field game solver"};
  app.require_subcommand(1);

  std::string config_path, output_dir, eps_min, report_path, baselines_file;
  std::vector<std::string> overrides;
  bool write_baselines = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration file")->required();
    cmd->add_option("--set", overrides, "override section.key=value");
  };

  CLI::App* solve = app.add_subcommand("solve", "run the full pipeline");
  add_common(solve);
  solve->add_option("--output-dir", output_dir, "output directory (overrides config)");
  solve->add_option("--eps-min", eps_min, "final eps of the annealing schedule");

  CLI::App* validate = app.add_subcommand("validate", "check a configuration only");
  add_common(validate);

  CLI::App* sweep = app.add_subcommand("sweep-eps", "run with the eps convergence study enabled");
  add_common(sweep);
  sweep->add_option("--output-dir", output_dir, "output directory (overrides config)");
  sweep->add_option("--eps-min", eps_min, "final eps of the annealing schedule");

  CLI::App* report = app.add_subcommand("report", "pretty-print a report file");
  report->add_option("file", report_path, "report.json produced by solve")->required();

  CLI::App* regen = app.add_subcommand("regen-baselines",
                                       "recompute canonical baseline values");
  regen->add_option("--file", baselines_file, "baselines file to refresh");
  regen->add_flag("--write", write_baselines, "write the refreshed values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (solve->parsed()) return run_solve(config_path, overrides, output_dir, eps_min, false);
  if (validate->parsed()) return run_validate(config_path, overrides);
  if (sweep->parsed()) return run_solve(config_path, overrides, output_dir, eps_min, true);
  if (report->parsed()) return run_report(report_path);
  if (regen->parsed()) return run_regen(baselines_file, write_baselines);
  return kExitConfig;
}
