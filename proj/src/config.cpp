#include "mfg/config.hpp"

#include "mfg/expressions.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace mfg {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Entry {
  std::string value;
  int line = 0;       // 0 for overrides
  bool used = false;
};

// Flat "section.key" -> value table with line tracking.
class KeyTable {
 public:
  std::vector<std::string> errors;

  void insert(const std::string& key, const std::string& value, int line) {
    auto [it, fresh] = entries_.try_emplace(key, Entry{value, line, false});
    if (!fresh) {
      std::ostringstream os;
      os << "line " << line << ": duplicate key '" << key << "' (first set on line "
         << it->second.line << ")";
      errors.push_back(os.str());
    }
  }

  void override_value(const std::string& key, const std::string& value) {
    entries_[key] = Entry{value, 0, false};
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string take(const std::string& key, const std::string& fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.used = true;
    return it->second.value;
  }

  bool take_required(const std::string& key, std::string& out) {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      errors.push_back("missing required key '" + key + "'");
      return false;
    }
    it->second.used = true;
    out = it->second.value;
    return true;
  }

  void mark_used(const std::string& key) {
    auto it = entries_.find(key);
    if (it != entries_.end()) it->second.used = true;
  }

  void report_unused() {
    for (const auto& [key, entry] : entries_) {
      if (entry.used) continue;
      std::ostringstream os;
      if (entry.line > 0) os << "line " << entry.line << ": ";
      os << "unknown key '" << key << "'";
      errors.push_back(os.str());
    }
  }

 private:
  std::map<std::string, Entry> entries_;
};

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

bool parse_int(const std::string& text, int& out) {
  const std::string t = trim(text);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && p == t.data() + t.size();
}

bool parse_bool(const std::string& text, bool& out) {
  const std::string t = trim(text);
  if (t == "true" || t == "on" || t == "1") { out = true; return true; }
  if (t == "false" || t == "off" || t == "0") { out = false; return true; }
  return false;
}

GridField field_from_spec(const std::string& spec, const PeriodicGrid& grid,
                          const std::string& key, std::vector<std::string>& errors) {
  const std::string t = trim(spec);
  if (t.rfind("raw:", 0) == 0) {
    GridField f(grid);
    std::stringstream ss(t.substr(4));
    std::string item;
    std::int64_t count = 0;
    while (std::getline(ss, item, ',')) {
      double v = 0.0;
      if (!parse_double(item, v)) {
        errors.push_back(key + ": bad raw value '" + trim(item) + "'");
        return f;
      }
      if (count < f.size()) f[count] = v;
      ++count;
    }
    if (count != f.size())
      errors.push_back(key + ": raw array has " + std::to_string(count) + " values, grid needs " +
                       std::to_string(f.size()));
    return f;
  }
  try {
    return evaluate_expression(t, grid);
  } catch (const ExprError& err) {
    errors.push_back(key + ": " + err.what() + " (at offset " + std::to_string(err.position) +
                     " of expression)");
    return GridField(grid);
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  KeyTable table;
  static const std::vector<std::string> kSections = {"model", "schedule", "solver", "output",
                                                     "probes"};

  std::string section;
  int line_no = 0;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        table.errors.push_back("line " + std::to_string(line_no) + ": unterminated section header");
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
        table.errors.push_back("line " + std::to_string(line_no) + ": unknown section '" +
                               section + "'");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      table.errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    if (section.empty()) {
      table.errors.push_back("line " + std::to_string(line_no) + ": key outside any section");
      continue;
    }
    table.insert(section + "." + trim(t.substr(0, eq)), trim(t.substr(eq + 1)), line_no);
  }

  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      table.errors.push_back("override '" + ov + "': expected section.key=value");
      continue;
    }
    const std::string key = trim(ov.substr(0, eq));
    if (key.find('.') == std::string::npos) {
      table.errors.push_back("override '" + ov + "': key must be section.key");
      continue;
    }
    table.override_value(key, trim(ov.substr(eq + 1)));
  }

  RunConfig cfg;
  auto get_int = [&](const std::string& key, int fallback) {
    const std::string v = table.take(key, "");
    if (v.empty()) return fallback;
    int out = fallback;
    if (!parse_int(v, out)) table.errors.push_back(key + ": expected an integer, got '" + v + "'");
    return out;
  };
  auto get_double = [&](const std::string& key, double fallback) {
    const std::string v = table.take(key, "");
    if (v.empty()) return fallback;
    double out = fallback;
    if (!parse_double(v, out)) table.errors.push_back(key + ": expected a number, got '" + v + "'");
    return out;
  };
  auto get_bool = [&](const std::string& key, bool fallback) {
    const std::string v = table.take(key, "");
    if (v.empty()) return fallback;
    bool out = fallback;
    if (!parse_bool(v, out)) table.errors.push_back(key + ": expected true/false, got '" + v + "'");
    return out;
  };

  // [model]
  std::string tmp;
  if (table.take_required("model.modes", tmp)) {
    if (!parse_int(tmp, cfg.model.modes))
      table.errors.push_back("model.modes: expected an integer, got '" + tmp + "'");
  }
  if (table.take_required("model.dim", tmp)) {
    if (!parse_int(tmp, cfg.model.dim))
      table.errors.push_back("model.dim: expected an integer, got '" + tmp + "'");
  }
  if (table.take_required("model.points", tmp)) {
    if (!parse_int(tmp, cfg.model.points))
      table.errors.push_back("model.points: expected an integer, got '" + tmp + "'");
  }
  {
    const std::string v = table.take("model.coupling", "log");
    if (v == "log")
      cfg.model.coupling = CouplingKind::Log;
    else if (v == "power")
      cfg.model.coupling = CouplingKind::Power;
    else
      table.errors.push_back("model.coupling: expected log or power, got '" + v + "'");
  }
  const bool has_alpha = table.has("model.alpha");
  cfg.model.alpha = get_double("model.alpha", 0.5);
  if (cfg.model.coupling == CouplingKind::Power && !has_alpha)
    table.errors.push_back("model.alpha: required for power coupling");
  {
    const std::string v = table.take("model.penalty", "cubic");
    if (v == "cubic")
      cfg.model.penalty = PenaltyFamily::Cubic;
    else if (v == "quadratic")
      cfg.model.penalty = PenaltyFamily::Quadratic;
    else if (v == "exponential")
      cfg.model.penalty = PenaltyFamily::Exponential;
    else
      table.errors.push_back("model.penalty: expected cubic, quadratic or exponential, got '" +
                             v + "'");
  }
  cfg.model.source = get_double("model.source", 1.0);

  const int d = std::max(cfg.model.modes, 0);
  cfg.model.potential.assign(static_cast<std::size_t>(d), "0");
  for (int i = 1; i <= d; ++i) {
    const std::string key = "model.potential." + std::to_string(i);
    if (table.has(key)) cfg.model.potential[i - 1] = table.take(key, "0");
  }
  if (table.has("model.cost.default")) cfg.model.cost_default = table.take("model.cost.default", "");
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= d; ++j) {
      if (i == j) continue;
      const std::string key = "model.cost." + std::to_string(i) + "." + std::to_string(j);
      if (table.has(key)) cfg.model.cost_pairs[{i, j}] = table.take(key, "");
    }
  }
  if (d >= 2 && cfg.model.cost_default.empty() &&
      cfg.model.cost_pairs.size() != static_cast<std::size_t>(d) * (d - 1))
    table.errors.push_back(
        "model.cost.default: required unless every off-diagonal cost pair is given");

  // [schedule]
  cfg.schedule.lambda_count = get_int("schedule.lambda_steps", cfg.schedule.lambda_count);
  cfg.schedule.eps_start = get_double("schedule.eps_start", cfg.schedule.eps_start);
  cfg.schedule.eps_end = get_double("schedule.eps_end", cfg.schedule.eps_end);
  cfg.schedule.eps_count = get_int("schedule.eps_steps", cfg.schedule.eps_count);
  {
    const std::string v = table.take("schedule.sigma_start", "auto");
    if (v == "auto")
      cfg.schedule.sigma_start = -1.0;
    else if (!parse_double(v, cfg.schedule.sigma_start))
      table.errors.push_back("schedule.sigma_start: expected a number or auto, got '" + v + "'");
  }
  cfg.schedule.sigma_end = get_double("schedule.sigma_end", cfg.schedule.sigma_end);

  // [solver]
  cfg.solver.tol = get_double("solver.tol", cfg.solver.tol);
  cfg.solver.max_iter = get_int("solver.max_iter", cfg.solver.max_iter);
  cfg.solver.density_floor = get_double("solver.theta_floor", cfg.solver.density_floor);

  // [output]
  cfg.output.dir = table.take("output.dir", cfg.output.dir);
  cfg.output.fields = get_bool("output.fields", cfg.output.fields);
  cfg.output.binary = get_bool("output.binary", cfg.output.binary);

  // [probes]
  cfg.probes.uniqueness = get_bool("probes.uniqueness", cfg.probes.uniqueness);
  cfg.probes.eps_study = get_bool("probes.eps_study", cfg.probes.eps_study);
  cfg.probes.oracle = get_bool("probes.oracle", cfg.probes.oracle);
  cfg.probes.oracle_max_unknowns =
      get_int("probes.oracle_max_unknowns", cfg.probes.oracle_max_unknowns);
  {
    const std::string v = table.take("probes.seed", "0");
    std::uint64_t seed = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
    if (ec != std::errc() || p != v.data() + v.size())
      table.errors.push_back("probes.seed: expected a nonnegative integer, got '" + v + "'");
    cfg.probes.seed = seed;
  }

  table.report_unused();

  // Structural limits that build_model needs to hold before it can run.
  if (table.errors.empty()) {
    if (cfg.model.modes < 1) table.errors.push_back("model.modes: must be >= 1");
    if (cfg.model.dim < 1 || cfg.model.dim > 3)
      table.errors.push_back("model.dim: must be 1, 2 or 3");
    if (cfg.model.points < 4) table.errors.push_back("model.points: must be >= 4");
    if (!(cfg.schedule.eps_start > 0.0) || !(cfg.schedule.eps_end > 0.0))
      table.errors.push_back("schedule: eps values must stay positive");
    if (cfg.schedule.eps_end > cfg.schedule.eps_start)
      table.errors.push_back("schedule: eps_end must not exceed eps_start");
    if (cfg.schedule.lambda_count < 2)
      table.errors.push_back("schedule.lambda_steps: need at least 2");
    if (cfg.schedule.eps_count < 1) table.errors.push_back("schedule.eps_steps: need at least 1");
    if (!(cfg.solver.tol > 0.0)) table.errors.push_back("solver.tol: must be positive");
    if (cfg.solver.max_iter < 1) table.errors.push_back("solver.max_iter: must be >= 1");
  }

  // Model-level validation mirrors the solver's standing conditions.
  if (table.errors.empty()) {
    try {
      ModelSpec model = build_model(cfg);
      ValidationReport report = validate(model);
      for (const auto& check : report.checks)
        if (check.status == ValidationCheck::Status::Fail)
          table.errors.push_back(check.name + ": " + check.detail);
    } catch (const ConfigError& err) {
      for (const auto& e : err.errors) table.errors.push_back(e);
    }
  }

  if (!table.errors.empty()) throw ConfigError(table.errors);
  return cfg;
}

ModelSpec build_model(const RunConfig& cfg) {
  std::vector<std::string> errors;
  ModelSpec model;
  model.modes = cfg.model.modes;
  try {
    model.grid = PeriodicGrid::make(cfg.model.dim, cfg.model.points);
  } catch (const std::invalid_argument& err) {
    throw ConfigError({err.what()});
  }
  model.coupling.kind = cfg.model.coupling;
  model.coupling.alpha = cfg.model.alpha;
  model.penalty.family = cfg.model.penalty;
  model.penalty.eps = cfg.schedule.eps_end;
  model.source = cfg.model.source;

  for (int i = 0; i < model.modes; ++i) {
    const std::string key = "model.potential." + std::to_string(i + 1);
    model.hamiltonian.potential.push_back(
        field_from_spec(cfg.model.potential[i], model.grid, key, errors));
  }

  model.costs.modes = model.modes;
  model.costs.cost.assign(static_cast<std::size_t>(model.modes) * model.modes,
                          GridField(model.grid));
  if (model.modes >= 2) {
    GridField fallback(model.grid);
    if (!cfg.model.cost_default.empty())
      fallback = field_from_spec(cfg.model.cost_default, model.grid, "model.cost.default", errors);
    for (int i = 0; i < model.modes; ++i) {
      for (int j = 0; j < model.modes; ++j) {
        if (i == j) continue;
        auto it = cfg.model.cost_pairs.find({i + 1, j + 1});
        if (it != cfg.model.cost_pairs.end())
          model.costs.between(i, j) = field_from_spec(
              it->second, model.grid,
              "model.cost." + std::to_string(i + 1) + "." + std::to_string(j + 1), errors);
        else if (!cfg.model.cost_default.empty())
          model.costs.between(i, j) = fallback;
        else
          errors.push_back("model.cost." + std::to_string(i + 1) + "." + std::to_string(j + 1) +
                           ": missing and no model.cost.default given");
      }
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return model;
}

ContinuationSchedule build_schedule(const RunConfig& cfg, const PeriodicGrid& grid) {
  const double sigma_start =
      cfg.schedule.sigma_start < 0.0 ? grid.h : cfg.schedule.sigma_start;
  return ContinuationSchedule::standard(grid, cfg.schedule.lambda_count, cfg.schedule.eps_start,
                                        cfg.schedule.eps_end, cfg.schedule.eps_count, sigma_start,
                                        cfg.schedule.sigma_end);
}

NewtonOptions build_newton_options(const RunConfig& cfg) {
  NewtonOptions opts;
  opts.tol_residual = cfg.solver.tol;
  opts.max_iter = cfg.solver.max_iter;
  opts.density_floor = cfg.solver.density_floor;
  return opts;
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "[model]\n";
  os << "modes = " << cfg.model.modes << "\n";
  os << "dim = " << cfg.model.dim << "\n";
  os << "points = " << cfg.model.points << "\n";
  os << "coupling = " << (cfg.model.coupling == CouplingKind::Log ? "log" : "power") << "\n";
  if (cfg.model.coupling == CouplingKind::Power) os << "alpha = " << cfg.model.alpha << "\n";
  os << "penalty = "
     << (cfg.model.penalty == PenaltyFamily::Cubic
             ? "cubic"
             : cfg.model.penalty == PenaltyFamily::Quadratic ? "quadratic" : "exponential")
     << "\n";
  os << "source = " << cfg.model.source << "\n";
  for (std::size_t i = 0; i < cfg.model.potential.size(); ++i)
    os << "potential." << (i + 1) << " = " << cfg.model.potential[i] << "\n";
  if (!cfg.model.cost_default.empty()) os << "cost.default = " << cfg.model.cost_default << "\n";
  for (const auto& [pair, value] : cfg.model.cost_pairs)
    os << "cost." << pair.first << "." << pair.second << " = " << value << "\n";
  os << "\n[schedule]\n";
  os << "lambda_steps = " << cfg.schedule.lambda_count << "\n";
  os << "eps_start = " << cfg.schedule.eps_start << "\n";
  os << "eps_end = " << cfg.schedule.eps_end << "\n";
  os << "eps_steps = " << cfg.schedule.eps_count << "\n";
  if (cfg.schedule.sigma_start < 0.0)
    os << "sigma_start = auto\n";
  else
    os << "sigma_start = " << cfg.schedule.sigma_start << "\n";
  os << "sigma_end = " << cfg.schedule.sigma_end << "\n";
  os << "\n[solver]\n";
  os << "tol = " << cfg.solver.tol << "\n";
  os << "max_iter = " << cfg.solver.max_iter << "\n";
  os << "theta_floor = " << cfg.solver.density_floor << "\n";
  os << "\n[output]\n";
  os << "dir = " << cfg.output.dir << "\n";
  os << "fields = " << (cfg.output.fields ? "true" : "false") << "\n";
  os << "binary = " << (cfg.output.binary ? "true" : "false") << "\n";
  os << "\n[probes]\n";
  os << "uniqueness = " << (cfg.probes.uniqueness ? "true" : "false") << "\n";
  os << "eps_study = " << (cfg.probes.eps_study ? "true" : "false") << "\n";
  os << "oracle = " << (cfg.probes.oracle ? "true" : "false") << "\n";
  os << "oracle_max_unknowns = " << cfg.probes.oracle_max_unknowns << "\n";
  os << "seed = " << cfg.probes.seed << "\n";
  return os.str();
}

}  // namespace mfg
