#include "mfg/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mfg {

namespace {

constexpr double kExpClamp = 40.0;
constexpr std::int64_t kMaxPoints = std::int64_t{1} << 22;

std::string format_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double coupling_value(const CouplingLaw& law, double density) {
  if (!(density > 0.0))
    throw std::domain_error("coupling_value: density must be positive, got " +
                            format_value(density));
  return law.kind == CouplingKind::Log ? std::log(density) : std::pow(density, law.alpha);
}

double coupling_slope(const CouplingLaw& law, double density) {
  if (!(density > 0.0))
    throw std::domain_error("coupling_slope: density must be positive, got " +
                            format_value(density));
  return law.kind == CouplingKind::Log ? 1.0 / density
                                       : law.alpha * std::pow(density, law.alpha - 1.0);
}

double coupling_inverse(const CouplingLaw& law, double value) {
  if (law.kind == CouplingKind::Log) return std::exp(value);
  if (!(value > 0.0))
    throw std::domain_error("coupling_inverse: power coupling needs a positive value, got " +
                            format_value(value));
  return std::pow(value, 1.0 / law.alpha);
}

double penalty_value(PenaltyFamily family, double eps, double s) {
  if (s <= 0.0) return 0.0;
  switch (family) {
    case PenaltyFamily::Quadratic:
      return s * s / (2.0 * eps);
    case PenaltyFamily::Cubic:
      return s * s * s / (3.0 * eps);
    case PenaltyFamily::Exponential: {
      const double r = s / eps;
      if (r <= kExpClamp) return eps * (std::exp(r) - 1.0 - r);
      const double edge = eps * (std::exp(kExpClamp) - 1.0 - kExpClamp);
      return edge + std::expm1(kExpClamp) * (s - kExpClamp * eps);
    }
  }
  return 0.0;
}

double penalty_slope(PenaltyFamily family, double eps, double s) {
  if (s <= 0.0) return 0.0;
  switch (family) {
    case PenaltyFamily::Quadratic:
      return s / eps;
    case PenaltyFamily::Cubic:
      return s * s / eps;
    case PenaltyFamily::Exponential:
      return std::expm1(std::min(s / eps, kExpClamp));
  }
  return 0.0;
}

double penalty_curvature(PenaltyFamily family, double eps, double s) {
  if (s <= 0.0) return 0.0;
  switch (family) {
    case PenaltyFamily::Quadratic:
      return 1.0 / eps;
    case PenaltyFamily::Cubic:
      return 2.0 * s / eps;
    case PenaltyFamily::Exponential: {
      const double r = s / eps;
      return r <= kExpClamp ? std::exp(r) / eps : 0.0;
    }
  }
  return 0.0;
}

double ham_value(const HamiltonianSpec& spec, double lambda, int mode, std::int64_t index,
                 std::span<const double> p) {
  double kinetic = 0.0;
  for (double pk : p) kinetic += pk * pk;
  return 0.5 * kinetic + lambda * spec.potential[mode][index];
}

void ham_grad_p(const HamiltonianSpec&, double, int, std::int64_t, std::span<const double> p,
                std::span<double> out) {
  for (std::size_t k = 0; k < p.size(); ++k) out[k] = p[k];
}

void ham_hess_p(const HamiltonianSpec&, double, int, std::int64_t, std::span<const double> p,
                std::span<double> out) {
  const std::size_t dim = p.size();
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) out[r * dim + c] = (r == c) ? 1.0 : 0.0;
}

void ham_grad_x(const HamiltonianSpec& spec, double lambda, int mode, std::int64_t index,
                std::span<double> out) {
  const GridField& pot = spec.potential[mode];
  const PeriodicGrid& g = pot.grid();
  const double scale = lambda / (2.0 * g.h);
  for (int axis = 0; axis < g.dim; ++axis)
    out[axis] = (pot[g.shifted(index, axis, 1)] - pot[g.shifted(index, axis, -1)]) * scale;
}

SwitchingCosts SwitchingCosts::uniform(const PeriodicGrid& grid, int modes, double value) {
  SwitchingCosts c;
  c.modes = modes;
  c.cost.assign(static_cast<std::size_t>(modes) * modes, GridField(grid, value));
  return c;
}

double max_coupling_exponent(int dim) {
  if (dim <= 2) return std::numeric_limits<double>::infinity();
  const double b = std::sqrt(static_cast<double>(dim) / (dim - 2));
  const double q = b * (b - 1.0);
  return q / (2.0 - q);
}

bool ValidationReport::ok() const {
  for (const auto& c : checks)
    if (c.status == ValidationCheck::Status::Fail) return false;
  return true;
}

std::string ValidationReport::failure_summary() const {
  std::string out;
  for (const auto& c : checks) {
    if (c.status != ValidationCheck::Status::Fail) continue;
    if (!out.empty()) out += '\n';
    out += c.name + ": " + c.detail;
  }
  return out;
}

ValidationReport validate(const ModelSpec& model) {
  ValidationReport report;
  auto add = [&report](std::string name, ValidationCheck::Status status, std::string detail,
                       std::int64_t witness = -1) {
    report.checks.push_back({std::move(name), status, std::move(detail), witness});
  };
  using Status = ValidationCheck::Status;

  const int d = model.modes;
  const PeriodicGrid& g = model.grid;

  if (d < 1) {
    add("mode count", Status::Fail, "need at least one mode, got " + std::to_string(d));
    return report;
  }
  add("mode count", Status::Pass, std::to_string(d) + " modes");

  const std::int64_t points = static_cast<std::int64_t>(d) * g.size();
  if (points > kMaxPoints)
    add("problem size", Status::Fail,
        "d*n^N = " + std::to_string(points) + " exceeds budget " + std::to_string(kMaxPoints));
  else
    add("problem size", Status::Pass, "d*n^N = " + std::to_string(points));

  if (static_cast<int>(model.hamiltonian.potential.size()) != d) {
    add("potential count", Status::Fail,
        "expected one potential per mode, got " +
            std::to_string(model.hamiltonian.potential.size()));
    return report;
  }

  // Positivity of H: for the quadratic kind this is V >= 0 everywhere.
  {
    double worst = 0.0;
    std::int64_t witness = -1;
    int worst_mode = -1;
    for (int i = 0; i < d; ++i) {
      const GridField& v = model.hamiltonian.potential[i];
      if (!(v.grid() == g)) {
        add("potential grid", Status::Fail, "potential of mode " + std::to_string(i + 1) +
                                                " sampled on a different grid");
        return report;
      }
      if (!all_finite(v)) {
        add("potential finite", Status::Fail,
            "potential of mode " + std::to_string(i + 1) + " has non-finite entries");
        return report;
      }
      for (std::int64_t p = 0; p < v.size(); ++p) {
        if (v[p] < worst) {
          worst = v[p];
          witness = p;
          worst_mode = i;
        }
      }
    }
    if (witness >= 0)
      add("potential nonnegative", Status::Fail,
          "V^" + std::to_string(worst_mode + 1) + " = " + format_value(worst) +
              " < 0 at grid index " + std::to_string(witness),
          witness);
    else
      add("potential nonnegative", Status::Pass, "min V >= 0");
  }

  if (!(model.source > 0.0))
    add("source positive", Status::Fail, "source = " + format_value(model.source));
  else
    add("source positive", Status::Pass, "source = " + format_value(model.source));

  // Switching cost positivity (pairs only exist for d >= 2).
  if (d >= 2) {
    if (model.costs.modes != d ||
        model.costs.cost.size() != static_cast<std::size_t>(d) * d) {
      add("switching costs positive", Status::Fail, "cost table size does not match mode count");
      return report;
    }
    double worst = std::numeric_limits<double>::infinity();
    std::int64_t witness = -1;
    int wi = -1, wj = -1;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        const GridField& psi = model.costs.between(i, j);
        for (std::int64_t p = 0; p < psi.size(); ++p) {
          if (psi[p] < worst) {
            worst = psi[p];
            witness = p;
            wi = i;
            wj = j;
          }
        }
      }
    }
    if (!(worst > 0.0))
      add("switching costs positive", Status::Fail,
          "psi^{" + std::to_string(wi + 1) + std::to_string(wj + 1) + "} = " +
              format_value(worst) + " <= 0 at grid index " + std::to_string(witness),
          witness);
    else
      add("switching costs positive", Status::Pass, "min psi = " + format_value(worst));
  }

  // Coupling monotonicity and, for the power law, the exponent windows.
  if (model.coupling.kind == CouplingKind::Power) {
    const double alpha = model.coupling.alpha;
    if (!(alpha > 0.0 && alpha <= 1.0))
      add("coupling strictly increasing", Status::Fail,
          "power exponent must satisfy 0 < alpha <= 1, got alpha = " + format_value(alpha));
    else
      add("coupling strictly increasing", Status::Pass, "alpha = " + format_value(alpha));

    const double two_over_n = 2.0 / g.dim;
    if (!(alpha < two_over_n))
      add("P-2/N exponent window", Status::Fail,
          "P-2/N violated: alpha=" + format_value(alpha) + " >= 2/N=" + format_value(two_over_n));
    else
      add("P-2/N exponent window", Status::Pass,
          "alpha=" + format_value(alpha) + " < 2/N=" + format_value(two_over_n));

    const double limit = max_coupling_exponent(g.dim);
    if (!(alpha < limit))
      add("coupling exponent limit", Status::Fail,
          "alpha=" + format_value(alpha) + " >= alpha0(N)=" + format_value(limit));
    else
      add("coupling exponent limit", Status::Pass,
          "alpha=" + format_value(alpha) + " < alpha0(N)=" + format_value(limit));

    // Oscillation bound max_x H(0,x) < source, needed for the density
    // lower bound in the power case.
    double max_v = -std::numeric_limits<double>::infinity();
    std::int64_t witness = -1;
    int wmode = -1;
    for (int i = 0; i < d; ++i) {
      const GridField& v = model.hamiltonian.potential[i];
      for (std::int64_t p = 0; p < v.size(); ++p) {
        if (v[p] > max_v) {
          max_v = v[p];
          witness = p;
          wmode = i;
        }
      }
    }
    if (!(max_v < model.source))
      add("oscillation bound", Status::Fail,
          "max H(0,x) = max V^" + std::to_string(wmode + 1) + " = " + format_value(max_v) +
              " must stay below the source " + format_value(model.source),
          witness);
    else
      add("oscillation bound", Status::Pass,
          "max H(0,x) = " + format_value(max_v) + " < " + format_value(model.source));

    // The companion derivative condition at p = 0: the mixed derivative
    // vanishes identically for the quadratic kind, and the product
    // DxH(0,x).DpH(0,x) vanishes because DpH(0,x) = 0, but DxH(0,x) = DV
    // itself does not vanish for a generic potential. Only the inequality
    // above is enforced.
    add("derivative condition at p=0", Status::NotEnforced,
        "Dpx H(0,x) = 0 and DxH(0,x).DpH(0,x) = 0 hold for the quadratic kind; the single "
        "factor DxH(0,x) = DV is generally nonzero and is not constrained");
  } else {
    add("coupling strictly increasing", Status::Pass, "log coupling, slope 1/theta > 0");
  }

  // Penalty family shape on a dense sample of s in [-2, 2].
  {
    const double eps = model.penalty.eps > 0.0 ? model.penalty.eps : 1e-3;
    bool shape_ok = true;
    std::string why;
    for (double scale : {1.0, 0.1}) {
      const double e = eps * scale;
      double prev_value = penalty_value(model.penalty.family, e, -2.0);
      double prev_slope = penalty_slope(model.penalty.family, e, -2.0);
      for (int k = 0; k <= 400; ++k) {
        const double s = -2.0 + 4.0 * k / 400.0;
        const double b = penalty_value(model.penalty.family, e, s);
        const double bp = penalty_slope(model.penalty.family, e, s);
        if (s <= 0.0 && b != 0.0) { shape_ok = false; why = "nonzero on s <= 0"; break; }
        if (b < prev_value || bp < prev_slope) { shape_ok = false; why = "not convex/nondecreasing"; break; }
        if (b - s * bp > 1e-12) { shape_ok = false; why = "value - s*slope > 0"; break; }
        prev_value = b;
        prev_slope = bp;
      }
      if (!shape_ok) break;
    }
    add("penalty family shape", shape_ok ? Status::Pass : Status::Fail,
        shape_ok ? "zero on s<=0, nondecreasing, convex, value <= s*slope" : why);
    add("penalty slope/curvature uniformity", Status::NotEnforced,
        model.penalty.family == PenaltyFamily::Exponential
            ? "slope <= eps * curvature holds uniformly for the exponential family"
            : "slope <= C * curvature holds with C depending on the evaluation range; "
              "uniformity in eps is not required by the solver");
  }

  return report;
}

}  // namespace mfg
