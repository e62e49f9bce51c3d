#pragma once

#include "mfg/grid.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mfg {

// Density coupling g. Log is ln(theta); Power is theta^alpha with
// 0 < alpha <= 1 (alpha = 0 would kill strict monotonicity).
enum class CouplingKind { Log, Power };

struct CouplingLaw {
  CouplingKind kind = CouplingKind::Log;
  double alpha = 0.5;
};

// All three throw std::domain_error outside the feasible range (density <= 0,
// or a value outside the coupling's range); that signals a solver iterate
// left the positive cone rather than a programming error.
double coupling_value(const CouplingLaw& law, double density);
double coupling_slope(const CouplingLaw& law, double density);
double coupling_inverse(const CouplingLaw& law, double value);

// Penalty family beta_eps: zero on s <= 0, smooth, convex, nondecreasing.
// Cubic is the default (continuous curvature). Exponential clamps s/eps at
// 40 and continues with a linear tail to avoid overflow.
enum class PenaltyFamily { Quadratic, Cubic, Exponential };

struct PenaltySpec {
  PenaltyFamily family = PenaltyFamily::Cubic;
  double eps = 1e-3;
};

double penalty_value(PenaltyFamily family, double eps, double s);
double penalty_slope(PenaltyFamily family, double eps, double s);
double penalty_curvature(PenaltyFamily family, double eps, double s);

// Quadratic-plus-potential Hamiltonian per mode: 0.5|p|^2 + V_i(x),
// blended along the homotopy as 0.5|p|^2 + lambda * V_i(x).
struct HamiltonianSpec {
  std::vector<GridField> potential;  // one per mode, sampled on the grid

  int modes() const { return static_cast<int>(potential.size()); }
};

double ham_value(const HamiltonianSpec& spec, double lambda, int mode, std::int64_t index,
                 std::span<const double> p);
// d/dp of the blended Hamiltonian; equals p for this kind at every lambda.
void ham_grad_p(const HamiltonianSpec& spec, double lambda, int mode, std::int64_t index,
                std::span<const double> p, std::span<double> out);
// Hessian in p (row-major dim x dim); identity for this kind.
void ham_hess_p(const HamiltonianSpec& spec, double lambda, int mode, std::int64_t index,
                std::span<const double> p, std::span<double> out);
// d/dx of the blended Hamiltonian: lambda * DV (central differences).
void ham_grad_x(const HamiltonianSpec& spec, double lambda, int mode, std::int64_t index,
                std::span<double> out);

// Mode-switching prices psi^{ij} > 0; the diagonal is unused.
struct SwitchingCosts {
  int modes = 0;
  std::vector<GridField> cost;  // modes*modes fields, row-major (from, to)

  static SwitchingCosts uniform(const PeriodicGrid& grid, int modes, double value);

  const GridField& between(int from, int to) const {
    return cost[static_cast<std::size_t>(from) * modes + to];
  }
  GridField& between(int from, int to) {
    return cost[static_cast<std::size_t>(from) * modes + to];
  }
};

struct ModelSpec {
  int modes = 1;  // d
  PeriodicGrid grid;
  HamiltonianSpec hamiltonian;
  CouplingLaw coupling;
  SwitchingCosts costs;
  PenaltySpec penalty;
  double source = 1.0;  // transport right-hand side, > 0
};

// Largest admissible power-coupling exponent from the Sobolev bootstrap:
// solves 2*a = (a+1)*b*(b-1) with b = sqrt(dim/(dim-2)); +infinity for
// dim <= 2.
double max_coupling_exponent(int dim);

struct ValidationCheck {
  enum class Status { Pass, Fail, NotEnforced };
  std::string name;
  Status status = Status::Pass;
  std::string detail;
  std::int64_t witness = -1;  // grid index of a failing point, when applicable
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  // Messages of all failing checks, one per line.
  std::string failure_summary() const;
};

// Checks the standing model conditions (positivity of costs and potentials,
// coupling monotonicity and exponent limits, oscillation bound for power
// coupling, penalty family shape). Failures are report entries, not throws.
ValidationReport validate(const ModelSpec& model);

}  // namespace mfg
