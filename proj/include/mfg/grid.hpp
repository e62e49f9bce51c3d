#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace mfg {

// Uniform periodic grid on the unit torus: n points per axis, spacing
// h = 1/n, total n^dim points stored flat row-major (axis 0 slowest).
//
// Discrete calculus convention: gradient components are second-order
// central differences. The divergence applies the same central stencil per
// component, which makes it the exact negative transpose of the gradient
// under the inner product h^dim * sum(a*b); every summation-by-parts
// identity in the solver relies on that pairing. The compact (2*dim+1)-point
// laplacian is a separate operator used only for the sigma regularization;
// divergence(gradient(u)) instead equals the wide second-difference stencil
// (spacing 2h), and tests pin both identities.
struct PeriodicGrid {
  int dim = 1;
  int n = 4;
  double h = 0.25;

  // Throws std::invalid_argument unless dim in {1,2,3} and n >= 4.
  static PeriodicGrid make(int dim, int n);

  std::int64_t size() const {
    std::int64_t m = 1;
    for (int k = 0; k < dim; ++k) m *= n;
    return m;
  }

  std::int64_t stride(int axis) const {
    std::int64_t s = 1;
    for (int k = axis + 1; k < dim; ++k) s *= n;
    return s;
  }

  int coordinate(std::int64_t index, int axis) const {
    return static_cast<int>((index / stride(axis)) % n);
  }

  double position(std::int64_t index, int axis) const {
    return coordinate(index, axis) * h;
  }

  // Index of the point shifted by `cells` lattice steps along `axis`,
  // wrapping periodically. |cells| may exceed n.
  std::int64_t shifted(std::int64_t index, int axis, int cells) const {
    const std::int64_t s = stride(axis);
    const int c = coordinate(index, axis);
    int t = (c + cells) % n;
    if (t < 0) t += n;
    return index + static_cast<std::int64_t>(t - c) * s;
  }

  bool operator==(const PeriodicGrid&) const = default;
};

// Scalar samples on a PeriodicGrid, one value per grid point.
class GridField {
 public:
  GridField() = default;
  explicit GridField(const PeriodicGrid& grid, double fill = 0.0)
      : grid_(grid), values_(static_cast<std::size_t>(grid.size()), fill) {}

  const PeriodicGrid& grid() const { return grid_; }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }

  double& operator[](std::int64_t i) { return values_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return values_[static_cast<std::size_t>(i)]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

// One GridField per axis; components share the grid.
struct GridVectorField {
  std::vector<GridField> component;

  GridVectorField() = default;
  explicit GridVectorField(const PeriodicGrid& grid)
      : component(static_cast<std::size_t>(grid.dim), GridField(grid)) {}

  const PeriodicGrid& grid() const { return component.at(0).grid(); }
  int dim() const { return static_cast<int>(component.size()); }
};

// OpenMP-parallel kernels. All are pure; stencil outputs are bit-identical
// to the serial reference because each point is written independently.
GridVectorField gradient(const GridField& f);
GridField divergence(const GridVectorField& vf);
GridField laplacian(const GridField& f);
double integrate(const GridField& f);
double inner(const GridField& a, const GridField& b);

double sup_norm(const GridField& f);
double l2_norm(const GridField& f);
bool all_finite(const GridField& f);

// Copy of f translated by `cells` lattice steps along `axis`.
GridField shifted_copy(const GridField& f, int axis, int cells);

// Serial reference implementations kept for testing the parallel kernels
// (and as the baseline side of the benchmark tool).
namespace serial {
GridVectorField gradient(const GridField& f);
GridField divergence(const GridVectorField& vf);
GridField laplacian(const GridField& f);
double integrate(const GridField& f);
}  // namespace serial

}  // namespace mfg
