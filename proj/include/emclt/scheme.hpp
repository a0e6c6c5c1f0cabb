#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "emclt/model.hpp"
#include "emclt/paths.hpp"

namespace emclt {

/// Raised when a coefficient evaluation or a state becomes non-finite.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

enum class GridLevel { coarse, fine };

/// R^d-valued path on `steps + 1` equally spaced nodes of [0, 1].
struct SamplePath {
  TimeGrid grid{1, 1};
  GridLevel level = GridLevel::fine;
  std::size_t dim = 1;
  std::size_t steps = 0;
  std::vector<double> values;

  std::size_t nodes() const { return steps + 1; }
  double time(std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(steps);
  }
  std::span<const double> at(std::size_t j) const { return {values.data() + j * dim, dim}; }
  std::span<double> at(std::size_t j) { return {values.data() + j * dim, dim}; }
};

enum class MatrixProvenance { area_process, independent_brownian, occupation, synthetic };

/// R^{d x d}-valued path on the fine nodes of a grid, row-major per node.
struct MatrixPath {
  TimeGrid grid{1, 1};
  std::size_t dim = 1;
  std::vector<double> values;
  MatrixProvenance provenance = MatrixProvenance::synthetic;
  bool degenerate = false;

  std::size_t nodes() const { return grid.fine_nodes(); }
  std::span<const double> at(std::size_t j) const {
    return {values.data() + j * dim * dim, dim * dim};
  }
  double entry(std::size_t j, std::size_t row, std::size_t col) const {
    return values[j * dim * dim + row * dim + col];
  }
};

/// Euler-Maruyama on the level-k grid, fed by `path` coarsened to k steps.
/// Returns a coarse SamplePath with k + 1 nodes.
SamplePath euler_maruyama(const ModelSpec& model, const BrownianPath& path, std::size_t k);

/// nM-step Euler-Maruyama on the full fine grid of `path`: the proxy for X.
SamplePath reference_solution(const ModelSpec& model, const BrownianPath& path);

/// The continuous-time Euler process X^n evaluated at every fine node, with
/// coefficients frozen at kappa_n(t). Coincides bit-for-bit with
/// euler_maruyama(model, path, n) at coarse nodes.
SamplePath euler_maruyama_fine(const ModelSpec& model, const BrownianPath& path, std::size_t n);

/// V^n = sqrt(n) (ref - xn) node-wise; both paths must live on the same nodes.
SamplePath fluctuation(const SamplePath& ref, const SamplePath& xn, std::size_t n);

/// W^n_t = sqrt(2n) sum_j (B_{r_j} - B_{kappa_n(r_j)}) (x) dB_j with left-point
/// fine sums; entry (k, i) pairs B^{(k)} with dB^{(i)}. `n` must divide the
/// fine step count. The result is flagged degenerate when there is no
/// refinement inside coarse steps (it is then identically zero).
MatrixPath area_process(const BrownianPath& path, std::size_t n);

/// Cumulative path of an independent d x d Brownian motion built from a
/// d^2-dimensional increment sample.
MatrixPath brownian_matrix_path(const BrownianPath& increments, std::size_t dim);

/// All processes of one coupled draw: reference X, Euler X^n (on fine
/// nodes), V^n and W^n, driven by one Brownian path.
struct FluctuationBundle {
  SamplePath x_ref;
  SamplePath x_n;
  SamplePath v_n;
  MatrixPath w_n;
  std::size_t n = 1;
};

FluctuationBundle make_bundle(const ModelSpec& model, const BrownianPath& path);

}  // namespace emclt
