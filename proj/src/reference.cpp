// Serial reference implementations. Plain loops, no OpenMP: the test suites
// check the parallel kernels against these, and the benchmark tool times the
// two side by side.

#include "mfg/grid.hpp"
#include "mfg/model.hpp"
#include "mfg/solver.hpp"

#include <cmath>

namespace mfg::serial {

GridVectorField gradient(const GridField& f) {
  const PeriodicGrid& g = f.grid();
  GridVectorField out(g);
  const double scale = 1.0 / (2.0 * g.h);
  for (int axis = 0; axis < g.dim; ++axis) {
    for (std::int64_t p = 0; p < g.size(); ++p) {
      const double fwd = f[g.shifted(p, axis, 1)];
      const double bwd = f[g.shifted(p, axis, -1)];
      out.component[axis][p] = (fwd - bwd) * scale;
    }
  }
  return out;
}

GridField divergence(const GridVectorField& vf) {
  const PeriodicGrid& g = vf.grid();
  GridField out(g);
  const double scale = 1.0 / (2.0 * g.h);
  for (int axis = 0; axis < g.dim; ++axis) {
    const GridField& c = vf.component[axis];
    for (std::int64_t p = 0; p < g.size(); ++p) {
      out[p] += (c[g.shifted(p, axis, 1)] - c[g.shifted(p, axis, -1)]) * scale;
    }
  }
  return out;
}

GridField laplacian(const GridField& f) {
  const PeriodicGrid& g = f.grid();
  GridField out(g);
  const double scale = 1.0 / (g.h * g.h);
  for (int axis = 0; axis < g.dim; ++axis) {
    for (std::int64_t p = 0; p < g.size(); ++p) {
      out[p] += (f[g.shifted(p, axis, 1)] - 2.0 * f[p] + f[g.shifted(p, axis, -1)]) * scale;
    }
  }
  return out;
}

double integrate(const GridField& f) {
  double s = 0.0;
  for (std::int64_t p = 0; p < f.size(); ++p) s += f[p];
  double volume = 1.0;
  for (int k = 0; k < f.grid().dim; ++k) volume *= f.grid().h;
  return volume * s;
}

SystemResidual residual(const ModelSpec& model, const SolverState& state, double lambda,
                        double eps, double sigma) {
  const PeriodicGrid& g = model.grid;
  const int d = model.modes;
  const PenaltyFamily fam = model.penalty.family;

  SystemResidual out;
  out.hj.assign(d, GridField(g));
  out.transport.assign(d, GridField(g));

  std::vector<GridVectorField> du;
  du.reserve(d);
  for (int i = 0; i < d; ++i) du.push_back(gradient(state.value[i]));

  for (int i = 0; i < d; ++i) {
    const GridField& u = state.value[i];
    const GridField& th = state.density[i];
    const GridField& pot = model.hamiltonian.potential[i];

    GridVectorField flux(g);
    for (int k = 0; k < g.dim; ++k)
      for (std::int64_t p = 0; p < g.size(); ++p)
        flux.component[k][p] = du[i].component[k][p] * th[p];
    GridField div_flux = divergence(flux);
    GridField lap_u = laplacian(u);
    GridField lap_th = laplacian(th);

    for (std::int64_t p = 0; p < g.size(); ++p) {
      double kinetic = 0.0;
      for (int k = 0; k < g.dim; ++k) kinetic += du[i].component[k][p] * du[i].component[k][p];
      double hj = 0.5 * kinetic + lambda * pot[p] + u[p] - coupling_value(model.coupling, th[p]) -
                  sigma * lap_u[p];
      double fp = -div_flux[p] + th[p] - model.source - sigma * lap_th[p];
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const double s_ij = u[p] - state.value[j][p] - model.costs.between(i, j)[p];
        const double s_ji = state.value[j][p] - u[p] - model.costs.between(j, i)[p];
        hj += penalty_value(fam, eps, s_ij);
        fp += penalty_slope(fam, eps, s_ij) * th[p] -
              penalty_slope(fam, eps, s_ji) * state.density[j][p];
      }
      out.hj[i][p] = hj;
      out.transport[i][p] = fp;
    }
  }
  return out;
}

}  // namespace mfg::serial
