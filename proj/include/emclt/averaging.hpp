#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "emclt/model.hpp"
#include "emclt/scheme.hpp"

namespace emclt {

/// Gaussian mollification f_delta = f * N(0, delta^2 I).
///
/// Lacunary series are damped in closed form, a_k -> a_k exp(-(2^k delta)^2 / 2).
/// When delta is so small that every damping factor rounds to one, the
/// undamped series comes back unchanged. Any other drift is convolved by
/// tensor Gauss-Hermite quadrature (32 nodes in d=1, 16 in d=2, 8 in d=3);
/// the gradient uses the Gaussian integration-by-parts identity
/// grad f_delta(x) = E[f(x + delta Z) Z] / delta. Throws for delta <= 0 or
/// d > 3 on the quadrature route.
Drift mollify(const Drift& drift, double delta);

/// The mollification scale tied to the scheme: delta(n) = scale / sqrt(n).
double default_delta(std::size_t n, double scale = 1.0);

/// t -> (Q^X b)_t, entry (l, j) approximating int_0^t d_j b^l(X_s) ds.
struct OccupationDerivative {
  MatrixPath values;
  double delta = 0.0;
  std::string source;
};

/// Left-point Riemann sums of grad(b_delta)(X_s) ds over the fine nodes of
/// `x_path`. delta = 0 is accepted for C-infinity drifts and uses their exact
/// gradient.
OccupationDerivative qx_operator(const Drift& drift, const SamplePath& x_path, double delta);

struct HolderSeminormEstimate {
  double exponent = 0.0;
  double value = 0.0;
  std::vector<std::size_t> gaps;  // dyadic node gaps that were used
  bool degenerate = false;        // fewer than two nodes
};

/// max |p_t - p_s| / |t - s|^gamma over node pairs whose index gap is a power
/// of two and whose time gap is at most `max_gap`. `values` holds
/// `nodes * components` entries on equally spaced nodes of [0, 1]; the norm of
/// a difference is Euclidean across components.
HolderSeminormEstimate holder_seminorm(std::span<const double> values, std::size_t components,
                                       double gamma, double max_gap = 1.0);

HolderSeminormEstimate holder_seminorm(const SamplePath& path, double gamma,
                                       double max_gap = 1.0);
HolderSeminormEstimate holder_seminorm(const MatrixPath& path, double gamma,
                                       double max_gap = 1.0);

}  // namespace emclt
