#pragma once

#include "mfg/solver.hpp"

#include <vector>

namespace mfg {

// Grid densities approximating the limit switching measures:
// nu^{ij} = beta'_eps(u^i - u^j - psi^{ij}) * theta^i, nonnegative by
// construction and zero wherever the obstacle is slack. The pairing with
// theta^i (not theta^j) is forced by the transport equation's exchange term,
// and limit_transport_residual() reproduces the penalized transport residual
// exactly under this convention.
struct SwitchingCurrents {
  int modes = 0;
  std::vector<GridField> nu;  // modes*modes fields, row-major (from, to)

  const GridField& between(int from, int to) const {
    return nu[static_cast<std::size_t>(from) * modes + to];
  }
};

SwitchingCurrents switching_currents(const ModelSpec& model, const SolverState& state,
                                     double eps);

// Pointwise max-form residual of the obstacle system and the split
// violation norms.
struct ObstacleReport {
  // sup of the positive part of H(Du^i,x) + u^i - g(theta^i), per mode
  std::vector<double> hj_violation;
  // sup of the positive part of u^i - u^j - psi^{ij}, per ordered pair
  std::vector<double> obstacle_violation;  // modes*modes, diagonal zero
  std::vector<GridField> max_form;         // per mode
  std::vector<double> max_form_sup;

  double max_obstacle_violation() const;
};

ObstacleReport obstacle_residual(const ModelSpec& model, const SolverState& state);

// gap^{ij} = integral of nu^{ij} * |u^i - u^j - psi^{ij}|; small iff the
// current concentrates where the obstacle binds.
std::vector<double> complementarity_gap(const ModelSpec& model, const SolverState& state,
                                        const SwitchingCurrents& currents);

// Residual of the limit transport system with the extracted currents
// substituted; equals the penalized transport residual at (lambda=1, eps,
// sigma=0) when the currents come from the same state and eps.
std::vector<GridField> limit_transport_residual(const ModelSpec& model, const SolverState& state,
                                                const SwitchingCurrents& currents);

// Cauchy table over consecutive eps levels of a continuation trajectory.
struct EpsStudyRow {
  double eps_coarse = 0.0, eps_fine = 0.0;
  double value_diff_sup = 0.0;    // max_i ||u_i(coarse) - u_i(fine)||_inf
  double density_diff_l2 = 0.0;   // max_i L2 difference of densities
  double obstacle_violation = 0.0;  // at the fine level
  double max_gap = 0.0;             // at the fine level
};

std::vector<EpsStudyRow> eps_limit_study(const ModelSpec& model,
                                         const ContinuationSchedule& schedule,
                                         const NewtonOptions& opts = {});

std::vector<EpsStudyRow> eps_study_from_trajectory(const ModelSpec& model,
                                                   const std::vector<EpsSnapshot>& trajectory);

}  // namespace mfg
