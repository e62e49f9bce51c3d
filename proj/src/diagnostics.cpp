#include "mfg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfg {

EstimateReport estimate_report(const ModelSpec& model, const SolverState& state, double eps) {
  const PeriodicGrid& g = model.grid;
  const int d = model.modes;
  const std::int64_t m = g.size();
  const PenaltyFamily fam = model.penalty.family;

  EstimateReport rep;
  rep.per_mode.resize(d);

  double max_potential = 0.0;
  for (int i = 0; i < d; ++i)
    for (std::int64_t p = 0; p < m; ++p)
      max_potential = std::max(max_potential, model.hamiltonian.potential[i][p]);

  double sum_coupling_integral = 0.0;  // sum_i int g(theta^i)
  double sum_h_energy = 0.0;           // sum_i int H(Du^i, x) theta^i

  for (int i = 0; i < d; ++i) {
    ModeEstimates& e = rep.per_mode[i];
    const GridField& u = state.value[i];
    const GridField& th = state.density[i];
    const GridField& pot = model.hamiltonian.potential[i];

    GridVectorField du = gradient(u);
    GridVectorField dth = gradient(th);

    GridField speed2(g);       // |Du|^2
    GridField hess2(g);        // |D^2 u|^2
    for (int k = 0; k < g.dim; ++k) {
      GridVectorField second = gradient(du.component[k]);
      for (std::int64_t p = 0; p < m; ++p) {
        speed2[p] += du.component[k][p] * du.component[k][p];
        for (int l = 0; l < g.dim; ++l)
          hess2[p] += second.component[l][p] * second.component[l][p];
      }
    }

    GridField scratch(g);

    e.mass = integrate(th);
    for (std::int64_t p = 0; p < m; ++p)
      scratch[p] = th[p] * coupling_value(model.coupling, th[p]);
    e.coupling_energy = integrate(scratch);
    e.mean_value = integrate(u);
    for (std::int64_t p = 0; p < m; ++p) scratch[p] = speed2[p] * th[p];
    e.kinetic_energy = integrate(scratch);
    e.gradient_energy = integrate(speed2);
    for (std::int64_t p = 0; p < m; ++p) scratch[p] = hess2[p] * th[p];
    e.hessian_energy = integrate(scratch);
    for (std::int64_t p = 0; p < m; ++p) {
      double grad2 = 0.0;
      for (int k = 0; k < g.dim; ++k) grad2 += dth.component[k][p] * dth.component[k][p];
      scratch[p] = coupling_slope(model.coupling, th[p]) * grad2;
    }
    e.fisher_energy = integrate(scratch);

    e.penalty_budget = 0.0;
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      const GridField& psi = model.costs.between(i, j);
      for (std::int64_t p = 0; p < m; ++p) {
        const double s = u[p] - state.value[j][p] - psi[p];
        scratch[p] = penalty_slope(fam, eps, s) * psi[p] * th[p];
      }
      e.penalty_budget += integrate(scratch);
    }

    e.min_density = th[0];
    for (std::int64_t p = 1; p < m; ++p) e.min_density = std::min(e.min_density, th[p]);

    GridField th2(g), u2(g);
    for (std::int64_t p = 0; p < m; ++p) {
      th2[p] = th[p] * th[p];
      u2[p] = u[p] * u[p];
      double grad2 = 0.0;
      for (int k = 0; k < g.dim; ++k) grad2 += dth.component[k][p] * dth.component[k][p];
      scratch[p] = grad2;
    }
    e.density_w12 = std::sqrt(integrate(th2) + integrate(scratch));
    e.value_w22 = std::sqrt(integrate(u2) + e.gradient_energy + integrate(hess2));

    double osc = pot[0];
    for (std::int64_t p = 1; p < m; ++p) osc = std::max(osc, pot[p]);
    e.oscillation = osc;

    rep.total_mass += e.mass;
    for (std::int64_t p = 0; p < m; ++p)
      scratch[p] = coupling_value(model.coupling, th[p]);
    sum_coupling_integral += integrate(scratch);
    for (std::int64_t p = 0; p < m; ++p)
      scratch[p] = (0.5 * speed2[p] + pot[p]) * th[p];
    sum_h_energy += integrate(scratch);

    rep.energy_lhs += e.coupling_energy + e.penalty_budget;
  }
  rep.energy_lhs += sum_h_energy;
  rep.energy_rhs = sum_coupling_integral + 2.0 * max_potential;
  return rep;
}

LowerBoundCheck check_lower_bound(const ModelSpec& model, const SolverState& state) {
  LowerBoundCheck out;
  out.min_density = state.density[0][0];
  for (int i = 0; i < model.modes; ++i)
    for (std::int64_t p = 0; p < model.grid.size(); ++p)
      out.min_density = std::min(out.min_density, state.density[i][p]);

  if (model.coupling.kind == CouplingKind::Power) {
    double max_h0 = 0.0;
    for (int i = 0; i < model.modes; ++i)
      for (std::int64_t p = 0; p < model.grid.size(); ++p)
        max_h0 = std::max(max_h0, model.hamiltonian.potential[i][p]);
    const double base = model.source - max_h0;
    out.explicit_bound = true;
    out.bound = base > 0.0 ? std::pow(base, 1.0 / model.coupling.alpha) : 0.0;
    const double margin = 10.0 * model.grid.h * model.grid.h;
    out.pass = out.min_density >= out.bound - margin;
  } else {
    out.explicit_bound = false;
    out.bound = 10.0 * NewtonOptions{}.density_floor;
    out.pass = out.min_density >= out.bound;
  }
  return out;
}

MonotonicityGap monotonicity_gap(const ModelSpec& model, const SolverState& a,
                                 const SolverState& b) {
  const PeriodicGrid& g = model.grid;
  MonotonicityGap gap;
  for (int i = 0; i < model.modes; ++i) {
    GridField coupling_term(g), diff(g);
    for (std::int64_t p = 0; p < g.size(); ++p) {
      const double ta = a.density[i][p];
      const double tb = b.density[i][p];
      coupling_term[p] =
          (coupling_value(model.coupling, ta) - coupling_value(model.coupling, tb)) * (ta - tb);
      diff[p] = a.value[i][p] - b.value[i][p];
    }
    gap.coupling_term += integrate(coupling_term);
    GridVectorField dd = gradient(diff);
    GridField grad2(g);
    for (std::int64_t p = 0; p < g.size(); ++p)
      for (int k = 0; k < g.dim; ++k)
        grad2[p] += dd.component[k][p] * dd.component[k][p];
    gap.gradient_term += integrate(grad2);
  }
  return gap;
}

double mass_identity_gap(const ModelSpec& model, const SolverState& state, double lambda,
                         double eps, double sigma) {
  SystemResidual res = residual(model, state, lambda, eps, sigma);
  double fp_sum = 0.0, mass = 0.0;
  for (int i = 0; i < model.modes; ++i) {
    fp_sum += integrate(res.transport[i]);
    mass += integrate(state.density[i]);
  }
  return std::abs(fp_sum - (mass - model.modes * model.source));
}

namespace {

// Gaussian elimination with partial pivoting; local to the oracle so the
// verification path shares no linear algebra with the production solver.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (a[pivot * n + col] == 0.0) throw LinearSolveError("oracle: singular dense Jacobian");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] * inv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return x;
}

}  // namespace

SolverState oracle_solve(const ModelSpec& model, double lambda, double eps, double sigma,
                         const NewtonOptions& opts, const std::optional<SolverState>& start) {
  const int d = model.modes;
  const std::int64_t m = model.grid.size();
  const std::int64_t n = 2 * d * m;
  if (n > 1024)
    throw std::invalid_argument("oracle_solve: instance too large (" + std::to_string(n) +
                                " unknowns, limit 1024)");

  SolverState state = start ? *start : initial_state(model);

  auto eval = [&](const SolverState& s) { return pack_residual(residual(model, s, lambda, eps, sigma)); };
  auto to_state = [&](const Eigen::VectorXd& w) { return unpack_state(model, w); };

  Eigen::VectorXd x = pack_state(state);
  Eigen::VectorXd r = eval(state);

  StepReport trace;
  trace.lambda = lambda;
  trace.eps = eps;
  trace.sigma = sigma;
  trace.residual_history.push_back(r.lpNorm<Eigen::Infinity>());

  while (r.lpNorm<Eigen::Infinity>() > opts.tol_residual) {
    if (trace.iterations >= opts.max_iter)
      throw NewtonError("oracle_solve: no convergence in " + std::to_string(opts.max_iter) +
                            " iterations",
                        trace);

    // Finite-difference Jacobian, column by column. Density columns fall
    // back to a forward difference when a centered probe would leave the
    // positive cone.
    std::vector<double> jac(static_cast<std::size_t>(n) * n);
    for (std::int64_t col = 0; col < n; ++col) {
      const double t = 1e-7 * std::max(1.0, std::abs(x[col]));
      Eigen::VectorXd xp = x, xm = x;
      xp[col] += t;
      xm[col] -= t;
      const bool density_col = col >= d * m;
      if (density_col && xm[col] <= 0.0) {
        Eigen::VectorXd rp = eval(to_state(xp));
        for (std::int64_t row = 0; row < n; ++row)
          jac[static_cast<std::size_t>(row) * n + col] = (rp[row] - r[row]) / t;
      } else {
        Eigen::VectorXd rp = eval(to_state(xp));
        Eigen::VectorXd rm = eval(to_state(xm));
        for (std::int64_t row = 0; row < n; ++row)
          jac[static_cast<std::size_t>(row) * n + col] = (rp[row] - rm[row]) / (2.0 * t);
      }
    }

    std::vector<double> rhs(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) rhs[k] = -r[k];
    std::vector<double> delta = dense_solve(std::move(jac), std::move(rhs));

    double step = 1.0;
    for (std::int64_t k = d * m; k < n; ++k)
      while (x[k] + step * delta[k] < opts.density_floor && step > opts.min_step) step *= 0.5;

    const double rnorm = r.lpNorm<Eigen::Infinity>();
    for (;;) {
      Eigen::VectorXd xt = x;
      for (std::int64_t k = 0; k < n; ++k) xt[k] += step * delta[k];
      Eigen::VectorXd rt = eval(to_state(xt));
      if (rt.lpNorm<Eigen::Infinity>() <= (1.0 - 1e-4 * step) * rnorm) {
        x = std::move(xt);
        r = std::move(rt);
        break;
      }
      if (step <= opts.min_step)
        throw NewtonError("oracle_solve: line search stalled", trace);
      step *= 0.5;
    }
    ++trace.iterations;
    trace.residual_history.push_back(r.lpNorm<Eigen::Infinity>());
  }
  return to_state(x);
}

}  // namespace mfg
