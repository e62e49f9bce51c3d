#pragma once

#include "mfg/solver.hpp"

#include <optional>
#include <vector>

namespace mfg {

// Discrete quadrature of every integral quantity the a-priori theory tracks;
// raw numbers, no pass/fail judgment. Second derivatives are composed
// gradients, so only already-tested operators enter.
struct ModeEstimates {
  double mass = 0.0;             // int theta
  double coupling_energy = 0.0;  // int theta * g(theta)
  double mean_value = 0.0;       // int u
  double kinetic_energy = 0.0;   // int |Du|^2 theta
  double penalty_budget = 0.0;   // sum_j int beta'(i,j) psi^{ij} theta^i
  double gradient_energy = 0.0;  // int |Du|^2
  double hessian_energy = 0.0;   // int |D^2 u|^2 theta
  double fisher_energy = 0.0;    // int g'(theta) |Dtheta|^2
  double min_density = 0.0;
  double density_w12 = 0.0;      // discrete W^{1,2} norm of theta
  double value_w22 = 0.0;        // discrete W^{2,2} norm of u
  double oscillation = 0.0;      // max_x H(0,x) = max V^i
};

struct EstimateReport {
  std::vector<ModeEstimates> per_mode;
  double total_mass = 0.0;
  // Two sides of the coupled energy inequality with c = 1, C = 2 max V:
  // lhs = sum_i [int theta g(theta) + int H theta + penalty budget],
  // rhs = sum_i int g(theta) + C. Converged states should satisfy
  // lhs <= rhs within quadrature tolerance.
  double energy_lhs = 0.0;
  double energy_rhs = 0.0;
};

EstimateReport estimate_report(const ModelSpec& model, const SolverState& state, double eps);

// Density lower bound. Power coupling has the explicit bound
// (source - max H(0,x))^{1/alpha} up to a 10 h^2 discretization margin; the
// log case has a positive but non-explicit bound, so only gross positivity
// is asserted.
struct LowerBoundCheck {
  double bound = 0.0;
  double min_density = 0.0;
  bool pass = false;
  bool explicit_bound = false;
};

LowerBoundCheck check_lower_bound(const ModelSpec& model, const SolverState& state);

// The two scalars the uniqueness argument drives to zero for a pair of
// solutions: the coupling monotonicity term and the gradient-difference
// energy.
struct MonotonicityGap {
  double coupling_term = 0.0;  // sum_i int (g(tA)-g(tB))(tA-tB)
  double gradient_term = 0.0;  // sum_i int |D(uA-uB)|^2
};

MonotonicityGap monotonicity_gap(const ModelSpec& model, const SolverState& a,
                                 const SolverState& b);

// Structural transport-sum identity, valid for any feasible state:
// sum_i int fp^i - (sum_i int theta^i - d * source), zero to roundoff.
double mass_identity_gap(const ModelSpec& model, const SolverState& state, double lambda,
                         double eps, double sigma);

// Independent verification path: dense Newton on the identical residual with
// a finite-difference Jacobian and a local Gaussian elimination, sharing no
// code with the analytic Jacobian assembly or the sparse solve. Restricted
// to small instances (2 * d * n^N <= 1024 unknowns).
SolverState oracle_solve(const ModelSpec& model, double lambda, double eps, double sigma,
                         const NewtonOptions& opts = {},
                         const std::optional<SolverState>& start = std::nullopt);

}  // namespace mfg
