#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emclt/averaging.hpp"
#include "emclt/model.hpp"
#include "emclt/paths.hpp"
#include "emclt/scheme.hpp"
#include "emclt/stats.hpp"

namespace emclt {

/// Integrand Z (R^d, claimed Hoelder exponent beta) paired with an integrator
/// L (R^{d x d}, claimed exponent theta). Construction refuses pairs with
/// beta + theta <= 1 unless `force` is set.
class YoungPair {
 public:
  YoungPair(SamplePath integrand, MatrixPath integrator, double beta, double theta,
            bool force = false);

  const SamplePath& integrand() const { return z_; }
  const MatrixPath& integrator() const { return l_; }
  double beta() const { return beta_; }
  double theta() const { return theta_; }
  bool young_condition() const { return beta_ + theta_ > 1.0; }

 private:
  SamplePath z_;
  MatrixPath l_;
  double beta_;
  double theta_;
};

/// Left-point Riemann-Stieltjes sum: component l equals
/// sum_{t_j < t} sum_k (L^{(l,k)}_{t_{j+1}} - L^{(l,k)}_{t_j}) Z^{(k)}_{t_j}
/// over nodes up to the node index `up_to`.
std::vector<double> young_integral(const YoungPair& pair, std::size_t up_to);

/// Same sum over the subgrid that keeps every `stride`-th node.
std::vector<double> young_integral_subsampled(const YoungPair& pair, std::size_t stride);

/// Random-phase Weierstrass pair on 2^log2_steps equal steps of [0, 1]:
///   Z_t = sum_{k<terms} 3^{-beta k} cos(2 pi 3^k t + phi_k)      (every coordinate),
///   L_t = sum_{k<terms} 3^{-theta k} sin(2 pi 3^k t + psi_k) I,
/// with independent uniform phases drawn from `seed`.
YoungPair synthetic_young_pair(double beta, double theta, std::size_t log2_steps,
                               std::size_t terms, std::uint64_t seed, std::size_t dim = 1);

struct RefinementCascade {
  std::vector<std::size_t> levels;  // dyadic level k of the coarser sum
  std::vector<double> gaps;         // mean |I_{k+1} - I_k| over the pairs
  RateFit fit;                      // gaps against 2^k
  double exponent = 0.0;            // -fit.slope
};

/// Riemann-Stieltjes sums I_k on the subgrids with 2^k steps, k = min_level..L,
/// for pairs sharing one grid of 2^L steps; the decay of |I_{k+1} - I_k| is
/// fitted against the mesh.
RefinementCascade refinement_cascade(std::span<const YoungPair> pairs, std::size_t min_level);

/// beta = min(0.45, (1 + alpha)/2 - 0.05): the Hoelder exponent recorded for V.
double claimed_beta(double alpha);

enum class SummationOrder { forward, reverse };

struct LimitOptions {
  bool young_term = true;
  bool ito_term = true;
  bool forcing_term = true;
  double forcing_scale = 1.0;
  SummationOrder order = SummationOrder::forward;
  /// Require W to be an independent Brownian motion (law-level experiments).
  bool require_independent_w = false;
};

struct LimitSolutionHolder {
  SamplePath v;
  std::size_t steps = 0;
  SummationOrder order = SummationOrder::forward;
  double beta = 0.0;
  double delta = 0.0;  // mollification scale of the driving L
};

/// One-step hybrid Euler for
///   V^l_{j+1} = V^l_j + V^k dL^{(l,k)} + d_k sigma^{(l,i)}(X) V^k dB^i
///              + (1/sqrt 2) sigma^{(k,m)} d_k sigma^{(l,i)}(X) dW^{(m,i)}
/// with all drivers on the fine nodes of one grid.
LimitSolutionHolder solve_limit_holder(const ModelSpec& model, const SamplePath& x_ref,
                                       const OccupationDerivative& l, const BrownianPath& b,
                                       const MatrixPath& w, const LimitOptions& options = {});

/// Variation-of-constants value of V_1 in d = 1:
///   V_1 = Phi_1 sum_j Phi_j^{-1} (1/sqrt 2)(sigma sigma')(X_j) dW_j,
///   Phi_t = exp(int b'(X) ds + int sigma'(X) dB - 1/2 int sigma'(X)^2 ds),
/// evaluated with left-point fine quadrature. Requires a drift with gradient.
double voc_oracle_1d(const ModelSpec& model, const SamplePath& x_ref, const BrownianPath& b,
                     const MatrixPath& w);

}  // namespace emclt
