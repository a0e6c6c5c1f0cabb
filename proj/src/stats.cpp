#include "emclt/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "emclt/montecarlo.hpp"
#include "emclt/paths.hpp"

namespace emclt {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double pairwise_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("pairwise_mean: empty sample");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

Estimate mean_estimate(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("mean_estimate: need at least 2 samples");
  Estimate e;
  e.value = pairwise_mean(samples);
  std::vector<double> sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = samples[i] - e.value;
    sq[i] = c * c;
  }
  const double n = static_cast<double>(samples.size());
  e.se = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  return e;
}

Estimate lp_norm(std::span<const double> samples, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (samples.size() < 2) throw std::invalid_argument("lp_norm: need at least 2 samples");
  std::vector<double> powed(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw std::domain_error("lp_norm: non-finite sample at path index " + std::to_string(i));
    }
    powed[i] = std::pow(std::abs(samples[i]), p);
  }
  const Estimate m = mean_estimate(powed);
  Estimate out;
  out.value = std::pow(m.value, 1.0 / p);
  out.se = m.value > 0.0 ? out.value / (p * m.value) * m.se : 0.0;
  return out;
}

Estimate lp_norm_mc(const std::function<double(std::size_t)>& sampler, double p,
                    std::size_t n_paths, std::size_t threads) {
  if (n_paths < 2) throw std::invalid_argument("lp_norm_mc: need at least 2 paths");
  const std::vector<double> samples = parallel_map(n_paths, threads, sampler);
  return lp_norm(samples, p);
}

RateFit rate_fit(std::span<const double> ns, std::span<const double> errors,
                 std::span<const double> ses) {
  const std::size_t k = ns.size();
  if (k != errors.size() || (!ses.empty() && ses.size() != k)) {
    throw std::invalid_argument("rate_fit: input lengths differ");
  }
  if (k < 3) throw std::invalid_argument("rate_fit: at least 3 points are required");
  for (std::size_t i = 0; i < k; ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      throw std::invalid_argument("rate_fit: errors must be positive and finite");
    }
    if (!(ns[i] > 0.0)) throw std::invalid_argument("rate_fit: ns must be positive");
    if (i > 0 && !(ns[i] > ns[i - 1])) {
      throw std::invalid_argument("rate_fit: ns must be strictly increasing");
    }
  }
  RateFit fit;
  fit.ns.assign(ns.begin(), ns.end());
  fit.errors.assign(errors.begin(), errors.end());
  fit.ses.assign(ses.begin(), ses.end());
  fit.weighted = !ses.empty() && std::all_of(ses.begin(), ses.end(), [](double s) {
    return s > 0.0 && std::isfinite(s);
  });

  std::vector<double> x(k), y(k), w(k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    x[i] = std::log(ns[i]);
    y[i] = std::log(errors[i]);
    if (fit.weighted) {
      const double rel = ses[i] / errors[i];  // sd of log(error) by the delta method
      w[i] = 1.0 / (rel * rel);
    }
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    sse += w[i] * r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;

  double half = 0.0;
  if (fit.weighted) {
    half = 1.959963984540054 * std::sqrt(1.0 / sxx);
  } else {
    const double dof = static_cast<double>(k - 2);
    const boost::math::students_t dist(dof);
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    half = q * std::sqrt(sse / dof / sxx);
  }
  fit.slope_lo = fit.slope - half;
  fit.slope_hi = fit.slope + half;
  return fit;
}

namespace {

std::vector<double> sorted(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

void require_samples(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.empty() || b.empty()) throw std::invalid_argument(std::string(who) + ": empty sample");
}

// Walks the merged order statistics; calls step(x_next - x, |F - G|) between
// consecutive distinct points and reports sup |F - G|.
template <class Step>
double walk(const std::vector<double>& a, const std::vector<double>& b, Step step) {
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      x = a[i];
    } else {
      x = b[j];
    }
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    const double gap = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    sup = std::max(sup, gap);
    if (i < a.size() || j < b.size()) {
      const double nx = j >= b.size() ? a[i] : (i >= a.size() ? b[j] : std::min(a[i], b[j]));
      step(nx - x, gap);
    }
  }
  return sup;
}

double w1_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() == b.size()) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = std::abs(a[i] - b[i]);
    return pairwise_mean(d);
  }
  double acc = 0.0;
  walk(a, b, [&acc](double dx, double gap) { acc += dx * gap; });
  return acc;
}

}  // namespace

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b, "ks_statistic");
  return walk(sorted(a), sorted(b), [](double, double) {});
}

double w1_distance(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b, "w1_distance");
  return w1_sorted(sorted(a), sorted(b));
}

double w1_bootstrap_se(std::span<const double> a, std::span<const double> b, std::size_t reps,
                       std::uint64_t seed) {
  require_samples(a, b, "w1_bootstrap_se");
  if (reps < 2) throw std::invalid_argument("w1_bootstrap_se: need at least 2 replicates");
  std::vector<double> stats(reps);
  std::vector<double> ra(a.size()), rb(b.size());
  for (std::size_t r = 0; r < reps; ++r) {
    auto eng = make_engine({seed, r, 0x6f07});
    std::uniform_int_distribution<std::size_t> ia(0, a.size() - 1), ib(0, b.size() - 1);
    for (double& v : ra) v = a[ia(eng)];
    for (double& v : rb) v = b[ib(eng)];
    std::sort(ra.begin(), ra.end());
    std::sort(rb.begin(), rb.end());
    stats[r] = w1_sorted(ra, rb);
  }
  const Estimate m = mean_estimate(stats);
  return m.se * std::sqrt(static_cast<double>(reps));
}

double w1_permutation_floor(std::span<const double> a, std::span<const double> b,
                            std::size_t splits, std::uint64_t seed) {
  require_samples(a, b, "w1_permutation_floor");
  if (splits == 0) throw std::invalid_argument("w1_permutation_floor: splits must be >= 1");
  std::vector<double> pool(a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  std::vector<double> stats(splits);
  for (std::size_t s = 0; s < splits; ++s) {
    auto eng = make_engine({seed, s, 0x9e41});
    std::vector<double> p = pool;
    std::shuffle(p.begin(), p.end(), eng);
    std::vector<double> x(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(a.size()));
    std::vector<double> y(p.begin() + static_cast<std::ptrdiff_t>(a.size()), p.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    stats[s] = w1_sorted(x, y);
  }
  return pairwise_mean(stats);
}

}  // namespace emclt
