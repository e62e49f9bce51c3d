#include "mfg/limit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfg {

SwitchingCurrents switching_currents(const ModelSpec& model, const SolverState& state,
                                     double eps) {
  const PeriodicGrid& g = model.grid;
  const int d = model.modes;
  const PenaltyFamily fam = model.penalty.family;

  SwitchingCurrents out;
  out.modes = d;
  out.nu.assign(static_cast<std::size_t>(d) * d, GridField(g));

  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      GridField& nu = out.nu[static_cast<std::size_t>(i) * d + j];
      const GridField& ui = state.value[i];
      const GridField& uj = state.value[j];
      const GridField& psi = model.costs.between(i, j);
      const GridField& th = state.density[i];
      const std::int64_t m = g.size();
#pragma omp parallel for schedule(static)
      for (std::int64_t p = 0; p < m; ++p)
        nu[p] = penalty_slope(fam, eps, ui[p] - uj[p] - psi[p]) * th[p];
    }
  }
  return out;
}

double ObstacleReport::max_obstacle_violation() const {
  double best = 0.0;
  for (double v : obstacle_violation) best = std::max(best, v);
  return best;
}

ObstacleReport obstacle_residual(const ModelSpec& model, const SolverState& state) {
  const PeriodicGrid& g = model.grid;
  const int d = model.modes;
  const std::int64_t m = g.size();

  ObstacleReport rep;
  rep.hj_violation.assign(d, 0.0);
  rep.obstacle_violation.assign(static_cast<std::size_t>(d) * d, 0.0);
  rep.max_form.assign(d, GridField(g));
  rep.max_form_sup.assign(d, 0.0);

  std::vector<GridVectorField> du;
  du.reserve(d);
  for (int i = 0; i < d; ++i) du.push_back(gradient(state.value[i]));

  for (int i = 0; i < d; ++i) {
    double hj_viol = 0.0;
    for (std::int64_t p = 0; p < m; ++p) {
      double kinetic = 0.0;
      for (int k = 0; k < g.dim; ++k) {
        const double dk = du[i].component[k][p];
        kinetic += dk * dk;
      }
      const double hj_term = 0.5 * kinetic + model.hamiltonian.potential[i][p] +
                             state.value[i][p] -
                             coupling_value(model.coupling, state.density[i][p]);
      double pointwise = hj_term;
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const double slack =
            state.value[i][p] - state.value[j][p] - model.costs.between(i, j)[p];
        pointwise = std::max(pointwise, slack);
        auto& entry = rep.obstacle_violation[static_cast<std::size_t>(i) * d + j];
        entry = std::max(entry, slack);
      }
      hj_viol = std::max(hj_viol, hj_term);
      rep.max_form[i][p] = pointwise;
    }
    rep.hj_violation[i] = std::max(hj_viol, 0.0);
    rep.max_form_sup[i] = sup_norm(rep.max_form[i]);
  }
  for (auto& v : rep.obstacle_violation) v = std::max(v, 0.0);
  return rep;
}

std::vector<double> complementarity_gap(const ModelSpec& model, const SolverState& state,
                                        const SwitchingCurrents& currents) {
  const PeriodicGrid& g = model.grid;
  const int d = model.modes;
  if (currents.modes != d) throw std::invalid_argument("complementarity_gap: mode mismatch");

  std::vector<double> gap(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      const GridField& nu = currents.between(i, j);
      const GridField& psi = model.costs.between(i, j);
      GridField integrand(g);
      for (std::int64_t p = 0; p < g.size(); ++p)
        integrand[p] = nu[p] * std::abs(state.value[i][p] - state.value[j][p] - psi[p]);
      gap[static_cast<std::size_t>(i) * d + j] = integrate(integrand);
    }
  }
  return gap;
}

std::vector<GridField> limit_transport_residual(const ModelSpec& model, const SolverState& state,
                                                const SwitchingCurrents& currents) {
  const PeriodicGrid& g = model.grid;
  const int d = model.modes;
  const std::int64_t m = g.size();

  std::vector<GridField> out(static_cast<std::size_t>(d), GridField(g));
  for (int i = 0; i < d; ++i) {
    GridVectorField du = gradient(state.value[i]);
    GridVectorField flux(g);
    for (int k = 0; k < g.dim; ++k)
      for (std::int64_t p = 0; p < m; ++p)
        flux.component[k][p] = du.component[k][p] * state.density[i][p];
    GridField div_flux = divergence(flux);
    for (std::int64_t p = 0; p < m; ++p) {
      double r = -div_flux[p] + state.density[i][p] - model.source;
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        r += currents.between(i, j)[p] - currents.between(j, i)[p];
      }
      out[i][p] = r;
    }
  }
  return out;
}

std::vector<EpsStudyRow> eps_study_from_trajectory(const ModelSpec& model,
                                                   const std::vector<EpsSnapshot>& trajectory) {
  std::vector<EpsStudyRow> rows;
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    const EpsSnapshot& coarse = trajectory[k - 1];
    const EpsSnapshot& fine = trajectory[k];
    EpsStudyRow row;
    row.eps_coarse = coarse.eps;
    row.eps_fine = fine.eps;
    for (int i = 0; i < model.modes; ++i) {
      GridField du(model.grid), dth(model.grid);
      for (std::int64_t p = 0; p < model.grid.size(); ++p) {
        du[p] = coarse.state.value[i][p] - fine.state.value[i][p];
        dth[p] = coarse.state.density[i][p] - fine.state.density[i][p];
      }
      row.value_diff_sup = std::max(row.value_diff_sup, sup_norm(du));
      row.density_diff_l2 = std::max(row.density_diff_l2, l2_norm(dth));
    }
    ObstacleReport obs = obstacle_residual(model, fine.state);
    row.obstacle_violation = obs.max_obstacle_violation();
    SwitchingCurrents nu = switching_currents(model, fine.state, fine.eps);
    for (double gp : complementarity_gap(model, fine.state, nu))
      row.max_gap = std::max(row.max_gap, gp);
    rows.push_back(row);
  }
  return rows;
}

std::vector<EpsStudyRow> eps_limit_study(const ModelSpec& model,
                                         const ContinuationSchedule& schedule,
                                         const NewtonOptions& opts) {
  if (schedule.eps_steps.size() < 3)
    throw std::invalid_argument("eps_limit_study: need at least 3 eps levels");
  ContinuationResult run = continuation_run(model, schedule, opts, /*keep_trajectory=*/true);
  return eps_study_from_trajectory(model, run.trajectory);
}

}  // namespace mfg
