#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace emclt {

/// Sum by a fixed binary tree (blocks of 8 summed sequentially), so the
/// result depends only on the order of the input.
double pairwise_sum(std::span<const double> values);
double pairwise_mean(std::span<const double> values);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// (mean |x|^p)^{1/p} with a delta-method standard error. Throws
/// std::domain_error naming the first non-finite sample index.
Estimate lp_norm(std::span<const double> samples, double p);

/// Draws `n_paths` values sampler(i), i = 0..n_paths-1, in parallel (up to
/// `threads` workers) and returns lp_norm of them.
Estimate lp_norm_mc(const std::function<double(std::size_t)>& sampler, double p,
                    std::size_t n_paths, std::size_t threads = 1);

/// Sample mean and its standard error.
Estimate mean_estimate(std::span<const double> samples);

struct RateFit {
  std::vector<double> ns;
  std::vector<double> errors;
  std::vector<double> ses;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_lo = 0.0;  // 95% confidence interval for the slope
  double slope_hi = 0.0;
  bool weighted = false;
  bool degenerate = false;  // set upstream when the errors vanish identically
  std::string note;
};

/// Least squares of log(error) on log(n). When every standard error is
/// positive the fit is weighted by (error / se)^2 and the interval uses the
/// known-variance normal quantile; otherwise it is ordinary least squares with
/// a Student-t interval. Throws for fewer than 3 points, non-increasing ns or
/// non-positive errors.
RateFit rate_fit(std::span<const double> ns, std::span<const double> errors,
                 std::span<const double> ses = {});

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - G_b|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Wasserstein-1 distance between two empirical laws on the line,
/// int |F_a - G_b| dx.
double w1_distance(std::span<const double> a, std::span<const double> b);

/// Bootstrap standard error of w1_distance(a, b) resampling both samples.
double w1_bootstrap_se(std::span<const double> a, std::span<const double> b, std::size_t reps,
                       std::uint64_t seed);

/// Mean W1 between random splits of the pooled sample into groups of the
/// original sizes: the distance expected when both samples share one law.
double w1_permutation_floor(std::span<const double> a, std::span<const double> b,
                            std::size_t splits, std::uint64_t seed);

}  // namespace emclt
