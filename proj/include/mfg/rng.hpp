#pragma once

#include "mfg/grid.hpp"
#include "mfg/solver.hpp"

#include <cstdint>
#include <random>

namespace mfg {

// Deterministic uniform generator: the 64-bit engine output is mapped to
// doubles explicitly, so streams are reproducible across platforms and
// standard-library versions (probe noise is part of the run report).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  // Uniform in [-1, 1].
  double symmetric() { return 2.0 * uniform() - 1.0; }

 private:
  std::mt19937_64 gen_;
};

inline GridField random_field(const PeriodicGrid& grid, Rng& rng, double amplitude = 1.0) {
  GridField f(grid);
  for (std::int64_t p = 0; p < f.size(); ++p) f[p] = amplitude * rng.symmetric();
  return f;
}

// Feasible pseudo-random state: smooth-scale values, densities bounded away
// from zero.
inline SolverState random_feasible_state(const ModelSpec& model, Rng& rng,
                                         double value_amp = 0.5, double density_spread = 0.6) {
  SolverState s;
  for (int i = 0; i < model.modes; ++i) {
    s.value.push_back(random_field(model.grid, rng, value_amp));
    GridField th(model.grid);
    for (std::int64_t p = 0; p < th.size(); ++p)
      th[p] = 1.0 + density_spread * rng.symmetric();
    s.density.push_back(std::move(th));
  }
  return s;
}

}  // namespace mfg
