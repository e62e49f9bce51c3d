#pragma once

#include "mfg/model.hpp"

#include <Eigen/Sparse>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfg {

// The unknown pair: d value fields and d positive density fields.
struct SolverState {
  std::vector<GridField> value;    // u^i
  std::vector<GridField> density;  // theta^i, > 0 pointwise

  int modes() const { return static_cast<int>(value.size()); }
};

// Stacked residual of the penalized system: one Hamilton-Jacobi row and one
// transport row per mode.
struct SystemResidual {
  std::vector<GridField> hj;
  std::vector<GridField> transport;

  double sup() const;
};

struct NewtonOptions {
  double tol_residual = 1e-10;  // sup norm
  int max_iter = 50;
  double min_step = 9.5367431640625e-7;  // 2^-20 backtracking floor
  double density_floor = 1e-10;
};

struct StepReport {
  double lambda = 0.0, eps = 0.0, sigma = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;  // accepted norms, strictly decreasing
  int damping_events = 0;                // total backtracking halvings
  double wall_seconds = 0.0;
  bool bisected = false;  // reached through schedule bisection, not a scheduled node
};

struct SolveReport {
  std::vector<StepReport> steps;
  // Set when Newton iteration counts grow for three consecutive eps steps,
  // a hint that eps has been pushed below what the grid resolves.
  bool eps_iteration_warning = false;
  std::string note;
};

struct InfeasibleStateError : std::domain_error {
  using std::domain_error::domain_error;
};

struct LinearSolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NewtonError : std::runtime_error {
  StepReport report;
  NewtonError(const std::string& what, StepReport rep)
      : std::runtime_error(what), report(std::move(rep)) {}
};

struct ContinuationError : std::runtime_error {
  double lambda, eps, sigma;
  SolveReport report;
  ContinuationError(const std::string& what, double l, double e, double s, SolveReport rep)
      : std::runtime_error(what), lambda(l), eps(e), sigma(s), report(std::move(rep)) {}
};

// Homotopy/annealing driver data. Phase 1 marches lambda at (eps, sigma) =
// (eps_steps[0], sigma_steps[0]); phase 2 holds lambda = 1 and marches
// (eps_steps[k], sigma_steps[k]) jointly.
struct ContinuationSchedule {
  std::vector<double> lambda_steps;  // 0 = l_0 < ... < l_K = 1
  std::vector<double> eps_steps;     // strictly decreasing, > 0
  std::vector<double> sigma_steps;   // nonincreasing, >= 0, same length as eps_steps

  // lambda linspace, eps geometric; sigma geometric with an exact final
  // sigma_end (a zero sigma_end is reached from sigma_start*1e-3).
  static ContinuationSchedule standard(const PeriodicGrid& grid, int lambda_count,
                                       double eps_start, double eps_end, int eps_count,
                                       double sigma_start, double sigma_end);

  void validate() const;  // throws std::invalid_argument
};

struct EpsSnapshot {
  double eps = 0.0, sigma = 0.0;
  SolverState state;
};

struct ContinuationResult {
  SolverState state;
  SolveReport report;
  std::vector<EpsSnapshot> trajectory;  // scheduled eps nodes, when requested
};

// Explicit solution of the lambda = 0 system: u = g(source), theta = source.
SolverState initial_state(const ModelSpec& model);

// Residual of the penalized system at (lambda, eps) with the -sigma*laplacian
// regularization on both rows. Throws InfeasibleStateError on theta <= 0.
SystemResidual residual(const ModelSpec& model, const SolverState& state, double lambda,
                        double eps, double sigma);

// Exact derivative of residual() at the given state, assembled with the same
// stencils; unknown and row layout follow pack_state/pack_residual.
Eigen::SparseMatrix<double> jacobian(const ModelSpec& model, const SolverState& state,
                                     double lambda, double eps, double sigma);

// Flat layout: [value_1..d | density_1..d], each block of grid.size() entries.
Eigen::VectorXd pack_state(const SolverState& state);
SolverState unpack_state(const ModelSpec& model, const Eigen::VectorXd& w);
Eigen::VectorXd pack_residual(const SystemResidual& r);

// Damped Newton with a positivity safeguard: each step solves J*step = -R by
// sparse LU (iterative refinement to relative residual <= 1e-12), then
// backtracks until density stays above the floor and the sup norm decreases.
std::pair<SolverState, StepReport> newton_solve(const ModelSpec& model, SolverState start,
                                                double lambda, double eps, double sigma,
                                                const NewtonOptions& opts = {});

// Two-phase warm-started continuation; failed steps are bisected in the
// moving parameter up to 8 times before giving up.
ContinuationResult continuation_run(const ModelSpec& model, const ContinuationSchedule& schedule,
                                    const NewtonOptions& opts = {}, bool keep_trajectory = false);

namespace serial {
SystemResidual residual(const ModelSpec& model, const SolverState& state, double lambda,
                        double eps, double sigma);
}

}  // namespace mfg
