#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "emclt/model.hpp"
#include "emclt/paths.hpp"
#include "emclt/scheme.hpp"
#include "emclt/stats.hpp"

namespace emclt {

struct PdeResolution {
  std::size_t nx = 1601;  // spatial nodes on [-R, R]
  std::size_t nt = 1000;  // time steps on [0, 1]
};

/// Corrector u on the nodes (t_k, x_i), t_k = k dt, x_i = -R + i dx, stored
/// time-major: u[k * nx + i]. d = 1 only.
struct PDESolution {
  double theta = 0.0;
  double half_width = 0.0;  // R
  double dx = 0.0;
  double dt = 0.0;
  std::size_t nx = 0;
  std::size_t nt = 0;  // number of time steps; nt + 1 levels
  std::vector<double> u;
  std::vector<double> grad_u;
  std::vector<double> hess_u;
  double sup_grad = 0.0;
  double max_residual = 0.0;  // relative residual of the linear solves

  /// The transform needs |u'| < 1 everywhere.
  bool usable() const { return sup_grad < 1.0; }
  double x(std::size_t i) const { return -half_width + static_cast<double>(i) * dx; }
  double at(std::size_t k, std::size_t i) const { return u[k * nx + i]; }

  /// Bilinear interpolation of one of the fields at (t, x); x is clamped to
  /// [-R, R].
  double interpolate(const std::vector<double>& field, double t, double x) const;
};

/// Solves d_t u + (1/2) a u'' + b u' = theta u - b, u(1, .) = 0, backward in
/// time: implicit Euler for the first step then BDF2, central differences
/// with homogeneous Neumann conditions at +-R, tridiagonal solves. Derivative
/// fields are central differences (u' = 0 on the boundary). Throws
/// std::invalid_argument for d != 1 or theta <= 0, NumericalError when a
/// solve loses diagonal dominance or its residual exceeds 1e-6 relative.
PDESolution solve_corrector_pde(const ModelSpec& model, double theta, double half_width,
                                PdeResolution resolution = {});

struct GradientBoundRow {
  double theta = 0.0;
  double sup_grad = 0.0;
};

struct GradientBoundTable {
  std::vector<GradientBoundRow> rows;
  RateFit fit;         // log sup_grad against log theta
  bool fitted = false;  // false when some sup_grad vanishes or fewer than 3 rows
};

/// Tabulates sup_grad per solution (ascending theta) and fits the decay.
GradientBoundTable check_gradient_bound(std::span<const PDESolution> solutions);

struct LimitSolutionSobolev {
  SamplePath z;
  SamplePath v;
  const PDESolution* u_ref = nullptr;
  double max_roundtrip_error = 0.0;  // max |(1 + u') (1 + u')^{-1} - 1|
  std::size_t exits = 0;             // path nodes with |X| > R/2
};

/// Euler loop for Z = (1 + u'(t, X)) V in d = 1:
///   dZ = theta u' (1 + u')^{-1} Z dt + (u'' sigma + (1 + u') sigma') (1 + u')^{-1} Z dB
///        + (1/sqrt 2) (1 + u') sigma sigma' dW,
/// then V = (1 + u')^{-1} Z node-wise. Throws std::invalid_argument if u is not
/// usable or the drivers disagree, NumericalError at a node where
/// |1 + u'| < 1e-6.
LimitSolutionSobolev solve_limit_sobolev(const ModelSpec& model, const PDESolution& u,
                                         const SamplePath& x_ref, const BrownianPath& b,
                                         const MatrixPath& w);

/// Writes `<stem>.bin` (u then u', float64, native byte order, time-major)
/// and `<stem>.json` (shape, spacings, theta).
void dump_field(const PDESolution& u, const std::filesystem::path& stem);

}  // namespace emclt
