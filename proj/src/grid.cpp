#include "mfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfg {

namespace {

constexpr std::int64_t kReduceChunks = 64;

// Fixed-chunk reduction: partial sums over a thread-count-independent
// partition, combined in index order, so results do not depend on the
// OpenMP schedule.
template <typename PerIndex>
double chunked_sum(std::int64_t m, PerIndex&& term) {
  double partial[kReduceChunks] = {};
  const std::int64_t chunk = (m + kReduceChunks - 1) / kReduceChunks;
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < kReduceChunks; ++c) {
    const std::int64_t lo = c * chunk;
    const std::int64_t hi = std::min(m, lo + chunk);
    double s = 0.0;
    for (std::int64_t p = lo; p < hi; ++p) s += term(p);
    partial[c] = s;
  }
  double total = 0.0;
  for (std::int64_t c = 0; c < kReduceChunks; ++c) total += partial[c];
  return total;
}

double cell_volume(const PeriodicGrid& g) {
  double v = 1.0;
  for (int k = 0; k < g.dim; ++k) v *= g.h;
  return v;
}

}  // namespace

PeriodicGrid PeriodicGrid::make(int dim, int n) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("PeriodicGrid: dim must be 1, 2 or 3, got " + std::to_string(dim));
  if (n < 4)
    throw std::invalid_argument("PeriodicGrid: n must be >= 4, got " + std::to_string(n));
  PeriodicGrid g;
  g.dim = dim;
  g.n = n;
  g.h = 1.0 / n;
  return g;
}

GridVectorField gradient(const GridField& f) {
  const PeriodicGrid& g = f.grid();
  GridVectorField out(g);
  const std::int64_t m = g.size();
  const double scale = 1.0 / (2.0 * g.h);
  const double* src = f.data();
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::int64_t s = g.stride(axis);
    const int n = g.n;
    double* dst = out.component[axis].data();
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < m; ++p) {
      const int c = static_cast<int>((p / s) % n);
      const std::int64_t fwd = p + (c + 1 == n ? s * (1 - n) : s);
      const std::int64_t bwd = p + (c == 0 ? s * (n - 1) : -s);
      dst[p] = (src[fwd] - src[bwd]) * scale;
    }
  }
  return out;
}

GridField divergence(const GridVectorField& vf) {
  const PeriodicGrid& g = vf.grid();
  GridField out(g);
  const std::int64_t m = g.size();
  const double scale = 1.0 / (2.0 * g.h);
  double* dst = out.data();
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::int64_t s = g.stride(axis);
    const int n = g.n;
    const double* src = vf.component[axis].data();
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < m; ++p) {
      const int c = static_cast<int>((p / s) % n);
      const std::int64_t fwd = p + (c + 1 == n ? s * (1 - n) : s);
      const std::int64_t bwd = p + (c == 0 ? s * (n - 1) : -s);
      dst[p] += (src[fwd] - src[bwd]) * scale;
    }
  }
  return out;
}

GridField laplacian(const GridField& f) {
  const PeriodicGrid& g = f.grid();
  GridField out(g);
  const std::int64_t m = g.size();
  const double scale = 1.0 / (g.h * g.h);
  const double* src = f.data();
  double* dst = out.data();
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::int64_t s = g.stride(axis);
    const int n = g.n;
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < m; ++p) {
      const int c = static_cast<int>((p / s) % n);
      const std::int64_t fwd = p + (c + 1 == n ? s * (1 - n) : s);
      const std::int64_t bwd = p + (c == 0 ? s * (n - 1) : -s);
      dst[p] += (src[fwd] - 2.0 * src[p] + src[bwd]) * scale;
    }
  }
  return out;
}

double integrate(const GridField& f) {
  const double* v = f.data();
  return cell_volume(f.grid()) * chunked_sum(f.size(), [v](std::int64_t p) { return v[p]; });
}

double inner(const GridField& a, const GridField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("inner: grids differ");
  const double* x = a.data();
  const double* y = b.data();
  return cell_volume(a.grid()) *
         chunked_sum(a.size(), [x, y](std::int64_t p) { return x[p] * y[p]; });
}

double sup_norm(const GridField& f) {
  const double* v = f.data();
  const std::int64_t m = f.size();
  double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best)
  for (std::int64_t p = 0; p < m; ++p) best = std::max(best, std::abs(v[p]));
  return best;
}

double l2_norm(const GridField& f) {
  const double* v = f.data();
  return std::sqrt(cell_volume(f.grid()) *
                   chunked_sum(f.size(), [v](std::int64_t p) { return v[p] * v[p]; }));
}

bool all_finite(const GridField& f) {
  const double* v = f.data();
  const std::int64_t m = f.size();
  for (std::int64_t p = 0; p < m; ++p)
    if (!std::isfinite(v[p])) return false;
  return true;
}

GridField shifted_copy(const GridField& f, int axis, int cells) {
  const PeriodicGrid& g = f.grid();
  GridField out(g);
  const std::int64_t m = g.size();
  for (std::int64_t p = 0; p < m; ++p) out[g.shifted(p, axis, cells)] = f[p];
  return out;
}

}  // namespace mfg
