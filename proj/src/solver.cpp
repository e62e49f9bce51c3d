#include "mfg/solver.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace mfg {

namespace {

std::string tuple_str(double lambda, double eps, double sigma) {
  std::ostringstream os;
  os << "(lambda=" << lambda << ", eps=" << eps << ", sigma=" << sigma << ")";
  return os.str();
}

void check_feasible(const ModelSpec& model, const SolverState& state) {
  const int d = model.modes;
  if (state.modes() != d || static_cast<int>(state.density.size()) != d)
    throw InfeasibleStateError("state has wrong mode count");
  for (int i = 0; i < d; ++i) {
    const GridField& th = state.density[i];
    for (std::int64_t p = 0; p < th.size(); ++p)
      if (!(th[p] > 0.0))
        throw InfeasibleStateError("density of mode " + std::to_string(i + 1) +
                                   " is nonpositive at grid index " + std::to_string(p));
  }
}

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k)
    out[k] = count == 1 ? b : a + (b - a) * k / (count - 1);
  out.back() = b;
  return out;
}

std::vector<double> geomspace(double a, double b, int count) {
  std::vector<double> out(count);
  const double ratio = count > 1 ? std::pow(b / a, 1.0 / (count - 1)) : 1.0;
  double v = a;
  for (int k = 0; k < count; ++k) {
    out[k] = v;
    v *= ratio;
  }
  out.back() = b;
  if (count > 0) out.front() = a;
  return out;
}

}  // namespace

double SystemResidual::sup() const {
  double best = 0.0;
  for (const auto& f : hj) best = std::max(best, sup_norm(f));
  for (const auto& f : transport) best = std::max(best, sup_norm(f));
  return best;
}

ContinuationSchedule ContinuationSchedule::standard(const PeriodicGrid& grid, int lambda_count,
                                                    double eps_start, double eps_end,
                                                    int eps_count, double sigma_start,
                                                    double sigma_end) {
  ContinuationSchedule s;
  s.lambda_steps = linspace(0.0, 1.0, std::max(lambda_count, 2));
  s.eps_steps = geomspace(eps_start, eps_end, std::max(eps_count, 1));
  const int m = static_cast<int>(s.eps_steps.size());
  if (sigma_start <= 0.0) {
    s.sigma_steps.assign(m, 0.0);
  } else if (sigma_end > 0.0) {
    s.sigma_steps = geomspace(sigma_start, sigma_end, m);
  } else if (m == 1) {
    s.sigma_steps = {0.0};
  } else {
    s.sigma_steps = geomspace(sigma_start, sigma_start * 1e-3, m - 1);
    s.sigma_steps.push_back(0.0);
  }
  (void)grid;
  s.validate();
  return s;
}

void ContinuationSchedule::validate() const {
  if (lambda_steps.size() < 2 || lambda_steps.front() != 0.0 || lambda_steps.back() != 1.0)
    throw std::invalid_argument("schedule: lambda_steps must run from 0 to 1");
  for (std::size_t k = 1; k < lambda_steps.size(); ++k)
    if (!(lambda_steps[k] > lambda_steps[k - 1]))
      throw std::invalid_argument("schedule: lambda_steps must be strictly increasing");
  if (eps_steps.empty()) throw std::invalid_argument("schedule: eps_steps empty");
  for (double e : eps_steps)
    if (!(e > 0.0)) throw std::invalid_argument("schedule: eps_steps must stay positive");
  for (std::size_t k = 1; k < eps_steps.size(); ++k)
    if (!(eps_steps[k] < eps_steps[k - 1]))
      throw std::invalid_argument("schedule: eps_steps must be strictly decreasing");
  if (sigma_steps.size() != eps_steps.size())
    throw std::invalid_argument("schedule: sigma_steps and eps_steps must have equal length");
  for (double s : sigma_steps)
    if (s < 0.0) throw std::invalid_argument("schedule: sigma_steps must be nonnegative");
  for (std::size_t k = 1; k < sigma_steps.size(); ++k)
    if (sigma_steps[k] > sigma_steps[k - 1])
      throw std::invalid_argument("schedule: sigma_steps must be nonincreasing");
}

SolverState initial_state(const ModelSpec& model) {
  SolverState s;
  const double u0 = coupling_value(model.coupling, model.source);
  s.value.assign(model.modes, GridField(model.grid, u0));
  s.density.assign(model.modes, GridField(model.grid, model.source));
  return s;
}

SystemResidual residual(const ModelSpec& model, const SolverState& state, double lambda,
                        double eps, double sigma) {
  check_feasible(model, state);
  const PeriodicGrid& g = model.grid;
  const std::int64_t m = g.size();
  const int d = model.modes;
  const PenaltyFamily fam = model.penalty.family;

  SystemResidual out;
  out.hj.assign(d, GridField(g));
  out.transport.assign(d, GridField(g));

  std::vector<GridVectorField> du;
  du.reserve(d);
  for (int i = 0; i < d; ++i) du.push_back(gradient(state.value[i]));

  for (int i = 0; i < d; ++i) {
    const double* u = state.value[i].data();
    const double* th = state.density[i].data();
    const double* pot = model.hamiltonian.potential[i].data();

    GridVectorField flux(g);
    for (int k = 0; k < g.dim; ++k) {
      const double* dk = du[i].component[k].data();
      double* fk = flux.component[k].data();
#pragma omp parallel for schedule(static)
      for (std::int64_t p = 0; p < m; ++p) fk[p] = dk[p] * th[p];
    }
    GridField div_flux = divergence(flux);
    GridField lap_u = laplacian(state.value[i]);
    GridField lap_th = laplacian(state.density[i]);

    double* hj = out.hj[i].data();
    double* fp = out.transport[i].data();
    const CouplingLaw law = model.coupling;
    const double source = model.source;

#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < m; ++p) {
      double kinetic = 0.0;
      for (int k = 0; k < g.dim; ++k) {
        const double dk = du[i].component[k][p];
        kinetic += dk * dk;
      }
      double hj_p =
          0.5 * kinetic + lambda * pot[p] + u[p] - coupling_value(law, th[p]) - sigma * lap_u[p];
      double fp_p = -div_flux[p] + th[p] - source - sigma * lap_th[p];
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const double s_ij = u[p] - state.value[j][p] - model.costs.between(i, j)[p];
        const double s_ji = state.value[j][p] - u[p] - model.costs.between(j, i)[p];
        hj_p += penalty_value(fam, eps, s_ij);
        fp_p += penalty_slope(fam, eps, s_ij) * th[p] -
                penalty_slope(fam, eps, s_ji) * state.density[j][p];
      }
      hj[p] = hj_p;
      fp[p] = fp_p;
    }
  }
  return out;
}

Eigen::VectorXd pack_state(const SolverState& state) {
  const int d = state.modes();
  const std::int64_t m = state.value[0].size();
  Eigen::VectorXd w(2 * d * m);
  for (int i = 0; i < d; ++i)
    for (std::int64_t p = 0; p < m; ++p) {
      w[i * m + p] = state.value[i][p];
      w[(d + i) * m + p] = state.density[i][p];
    }
  return w;
}

SolverState unpack_state(const ModelSpec& model, const Eigen::VectorXd& w) {
  const int d = model.modes;
  const std::int64_t m = model.grid.size();
  SolverState s;
  s.value.assign(d, GridField(model.grid));
  s.density.assign(d, GridField(model.grid));
  for (int i = 0; i < d; ++i)
    for (std::int64_t p = 0; p < m; ++p) {
      s.value[i][p] = w[i * m + p];
      s.density[i][p] = w[(d + i) * m + p];
    }
  return s;
}

Eigen::VectorXd pack_residual(const SystemResidual& r) {
  const int d = static_cast<int>(r.hj.size());
  const std::int64_t m = r.hj[0].size();
  Eigen::VectorXd v(2 * d * m);
  for (int i = 0; i < d; ++i)
    for (std::int64_t p = 0; p < m; ++p) {
      v[i * m + p] = r.hj[i][p];
      v[(d + i) * m + p] = r.transport[i][p];
    }
  return v;
}

Eigen::SparseMatrix<double> jacobian(const ModelSpec& model, const SolverState& state,
                                     double lambda, double eps, double sigma) {
  check_feasible(model, state);
  const PeriodicGrid& g = model.grid;
  const std::int64_t m = g.size();
  const int d = model.modes;
  const int dim = g.dim;
  const PenaltyFamily fam = model.penalty.family;
  const double inv2h = 1.0 / (2.0 * g.h);
  const double inv4h2 = 1.0 / (4.0 * g.h * g.h);
  const double invh2 = 1.0 / (g.h * g.h);

  std::vector<GridVectorField> du;
  du.reserve(d);
  for (int i = 0; i < d; ++i) du.push_back(gradient(state.value[i]));

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(2 * d * m) * (6 * dim + 2 * d + 6));

  const auto vcol = [m](int mode, std::int64_t p) { return mode * m + p; };
  const auto fcol = [m, d](int mode, std::int64_t p) { return (d + mode) * m + p; };

  for (int i = 0; i < d; ++i) {
    const double* u = state.value[i].data();
    const double* th = state.density[i].data();

    for (std::int64_t p = 0; p < m; ++p) {
      const std::int64_t hj_row = vcol(i, p);
      const std::int64_t fp_row = fcol(i, p);

      double hj_diag_v = 1.0;                 // the +u term
      double fp_diag_f = 1.0;                 // the +theta term
      double fp_diag_v = 0.0;                 // wide-laplacian center from the flux
      double hj_diag_f = -coupling_slope(model.coupling, th[p]);

      for (int k = 0; k < dim; ++k) {
        const std::int64_t pf = g.shifted(p, k, 1);
        const std::int64_t pb = g.shifted(p, k, -1);
        const std::int64_t pff = g.shifted(p, k, 2);
        const std::int64_t pbb = g.shifted(p, k, -2);
        const double qk = du[i].component[k][p];

        // HJ: DpH(Du).Dv, central.
        trip.emplace_back(hj_row, vcol(i, pf), qk * inv2h);
        trip.emplace_back(hj_row, vcol(i, pb), -qk * inv2h);

        // FP: -div(theta * Dv), the wide stencil.
        trip.emplace_back(fp_row, vcol(i, pff), -th[pf] * inv4h2);
        trip.emplace_back(fp_row, vcol(i, pbb), -th[pb] * inv4h2);
        fp_diag_v += (th[pf] + th[pb]) * inv4h2;

        // FP: -div(Du * f), central with the gradient at the neighbor.
        trip.emplace_back(fp_row, fcol(i, pf), -du[i].component[k][pf] * inv2h);
        trip.emplace_back(fp_row, fcol(i, pb), du[i].component[k][pb] * inv2h);

        if (sigma != 0.0) {
          trip.emplace_back(hj_row, vcol(i, pf), -sigma * invh2);
          trip.emplace_back(hj_row, vcol(i, pb), -sigma * invh2);
          trip.emplace_back(fp_row, fcol(i, pf), -sigma * invh2);
          trip.emplace_back(fp_row, fcol(i, pb), -sigma * invh2);
        }
      }
      if (sigma != 0.0) {
        hj_diag_v += 2.0 * dim * sigma * invh2;
        fp_diag_f += 2.0 * dim * sigma * invh2;
      }

      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const double s_ij = u[p] - state.value[j][p] - model.costs.between(i, j)[p];
        const double s_ji = state.value[j][p] - u[p] - model.costs.between(j, i)[p];
        const double slope_ij = penalty_slope(fam, eps, s_ij);
        const double slope_ji = penalty_slope(fam, eps, s_ji);
        const double curv_ij = penalty_curvature(fam, eps, s_ij);
        const double curv_ji = penalty_curvature(fam, eps, s_ji);

        hj_diag_v += slope_ij;
        trip.emplace_back(hj_row, vcol(j, p), -slope_ij);

        const double exchange = curv_ij * th[p] + curv_ji * state.density[j][p];
        trip.emplace_back(fp_row, vcol(j, p), -exchange);
        fp_diag_v += exchange;
        fp_diag_f += slope_ij;
        trip.emplace_back(fp_row, fcol(j, p), -slope_ji);
      }

      trip.emplace_back(hj_row, vcol(i, p), hj_diag_v);
      trip.emplace_back(hj_row, fcol(i, p), hj_diag_f);
      trip.emplace_back(fp_row, vcol(i, p), fp_diag_v);
      trip.emplace_back(fp_row, fcol(i, p), fp_diag_f);
    }
  }

  Eigen::SparseMatrix<double> J(2 * d * m, 2 * d * m);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

namespace {

// Direct solve with iterative refinement; enforces the relative linear
// residual contract so the Newton quadratic phase stays observable.
Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs,
                             double lambda, double eps, double sigma) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success)
    throw LinearSolveError("sparse LU factorization failed at continuation step " +
                           tuple_str(lambda, eps, sigma));
  Eigen::VectorXd x = lu.solve(rhs);
  const double scale = std::max(rhs.lpNorm<Eigen::Infinity>(), 1e-300);
  for (int round = 0; round < 3; ++round) {
    Eigen::VectorXd r = rhs - J * x;
    if (r.lpNorm<Eigen::Infinity>() <= 1e-12 * scale) return x;
    x += lu.solve(r);
  }
  Eigen::VectorXd r = rhs - J * x;
  if (r.lpNorm<Eigen::Infinity>() > 1e-12 * scale)
    throw LinearSolveError("linear solve stalled above the 1e-12 relative residual contract at " +
                           tuple_str(lambda, eps, sigma));
  return x;
}

}  // namespace

std::pair<SolverState, StepReport> newton_solve(const ModelSpec& model, SolverState start,
                                                double lambda, double eps, double sigma,
                                                const NewtonOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  StepReport report;
  report.lambda = lambda;
  report.eps = eps;
  report.sigma = sigma;

  const int d = model.modes;
  const std::int64_t m = model.grid.size();

  SolverState state = std::move(start);
  SystemResidual res = residual(model, state, lambda, eps, sigma);
  double rnorm = res.sup();
  report.residual_history.push_back(rnorm);

  auto finish = [&](SolverState s) {
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::make_pair(std::move(s), report);
  };

  while (rnorm > opts.tol_residual) {
    if (report.iterations >= opts.max_iter)
      throw NewtonError("Newton did not converge in " + std::to_string(opts.max_iter) +
                            " iterations at " + tuple_str(lambda, eps, sigma) +
                            ", residual = " + std::to_string(rnorm),
                        report);

    Eigen::SparseMatrix<double> J = jacobian(model, state, lambda, eps, sigma);
    Eigen::VectorXd rhs = -pack_residual(res);
    Eigen::VectorXd delta = solve_linear(J, rhs, lambda, eps, sigma);

    // Largest dyadic step keeping every density above the floor.
    double step = 1.0;
    for (int i = 0; i < d; ++i) {
      for (std::int64_t p = 0; p < m; ++p) {
        const double dth = delta[(d + i) * m + p];
        if (dth >= 0.0) continue;
        const double room = state.density[i][p] - opts.density_floor;
        while (step * (-dth) > room && step > opts.min_step) {
          step *= 0.5;
          ++report.damping_events;
        }
      }
    }

    // Armijo backtracking on the residual sup norm.
    SolverState trial;
    SystemResidual trial_res;
    double trial_norm = 0.0;
    for (;;) {
      trial = state;
      for (int i = 0; i < d; ++i)
        for (std::int64_t p = 0; p < m; ++p) {
          trial.value[i][p] += step * delta[i * m + p];
          trial.density[i][p] += step * delta[(d + i) * m + p];
          if (trial.density[i][p] < opts.density_floor)
            trial.density[i][p] = opts.density_floor;
        }
      trial_res = residual(model, trial, lambda, eps, sigma);
      trial_norm = trial_res.sup();
      if (trial_norm <= (1.0 - 1e-4 * step) * rnorm) break;
      if (step <= opts.min_step)
        throw NewtonError("Newton line search hit the minimal step at " +
                              tuple_str(lambda, eps, sigma) + ", residual = " +
                              std::to_string(rnorm),
                          report);
      step *= 0.5;
      ++report.damping_events;
    }

    state = std::move(trial);
    res = std::move(trial_res);
    rnorm = trial_norm;
    ++report.iterations;
    report.residual_history.push_back(rnorm);
  }
  return finish(std::move(state));
}

ContinuationResult continuation_run(const ModelSpec& model, const ContinuationSchedule& schedule,
                                    const NewtonOptions& opts, bool keep_trajectory) {
  schedule.validate();
  ContinuationResult result;
  result.state = initial_state(model);

  const double eps0 = schedule.eps_steps.front();
  const double sigma0 = schedule.sigma_steps.front();

  // One warm-started solve, bisecting toward the target on Newton failure.
  // `move` advances exactly one parameter (by contract of the two phases).
  auto march = [&](double& cur_lambda, double& cur_eps, double& cur_sigma, double tgt_lambda,
                   double tgt_eps, double tgt_sigma) {
    int depth = 0;
    while (cur_lambda != tgt_lambda || cur_eps != tgt_eps || cur_sigma != tgt_sigma) {
      // Interpolation parameter toward the target; bisection halves it.
      // t = 1 lands on the target exactly (no roundoff drift off the node).
      double t = 1.0;
      for (;;) {
        const double lam = t == 1.0 ? tgt_lambda : cur_lambda + t * (tgt_lambda - cur_lambda);
        const double ep = t == 1.0 ? tgt_eps : cur_eps * std::pow(tgt_eps / cur_eps, t);
        const double sg = t == 1.0 ? tgt_sigma : cur_sigma + t * (tgt_sigma - cur_sigma);
        try {
          auto [next, step] = newton_solve(model, result.state, lam, ep, sg, opts);
          step.bisected = (t != 1.0);
          result.state = std::move(next);
          result.report.steps.push_back(std::move(step));
          cur_lambda = lam;
          cur_eps = ep;
          cur_sigma = sg;
          break;
        } catch (const NewtonError& err) {
          if (++depth > 8)
            throw ContinuationError("continuation aborted after 8 bisections near " +
                                        tuple_str(tgt_lambda, tgt_eps, tgt_sigma) + ": " +
                                        err.what(),
                                    tgt_lambda, tgt_eps, tgt_sigma, result.report);
          t *= 0.5;
        }
      }
    }
  };

  double cur_lambda = 0.0, cur_eps = eps0, cur_sigma = sigma0;

  // Phase 1: lambda homotopy at fixed (eps0, sigma0). The lambda = 0 member
  // is solved exactly by the initial state; newton_solve confirms in zero
  // iterations.
  {
    auto [st, step] = newton_solve(model, result.state, 0.0, eps0, sigma0, opts);
    result.state = std::move(st);
    result.report.steps.push_back(std::move(step));
  }
  for (std::size_t k = 1; k < schedule.lambda_steps.size(); ++k)
    march(cur_lambda, cur_eps, cur_sigma, schedule.lambda_steps[k], eps0, sigma0);

  if (keep_trajectory) result.trajectory.push_back({cur_eps, cur_sigma, result.state});

  // Phase 2: anneal (eps, sigma) jointly at lambda = 1.
  std::vector<int> scheduled_iters;
  scheduled_iters.push_back(result.report.steps.empty() ? 0
                                                        : result.report.steps.back().iterations);
  for (std::size_t k = 1; k < schedule.eps_steps.size(); ++k) {
    march(cur_lambda, cur_eps, cur_sigma, 1.0, schedule.eps_steps[k], schedule.sigma_steps[k]);
    scheduled_iters.push_back(result.report.steps.back().iterations);
    if (keep_trajectory) result.trajectory.push_back({cur_eps, cur_sigma, result.state});
  }

  for (std::size_t k = 2; k + 1 <= scheduled_iters.size(); ++k) {
    if (scheduled_iters[k] > scheduled_iters[k - 1] &&
        scheduled_iters[k - 1] > scheduled_iters[k - 2]) {
      result.report.eps_iteration_warning = true;
      result.report.note = "Newton iteration counts grew over three consecutive eps steps; "
                           "eps may be below grid resolution";
      break;
    }
  }
  return result;
}

}  // namespace mfg
