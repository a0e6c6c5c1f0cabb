#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "emclt/montecarlo.hpp"
#include "emclt/paths.hpp"
#include "emclt/stats.hpp"

using namespace emclt;

namespace {
std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double mean = 0.0) {
  auto eng = make_engine({seed, 0, 0});
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (double& x : v) x = mean + z(eng);
  return v;
}
}  // namespace

TEST_CASE("pairwise summation") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_mean(v) == 500.5);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("L_p norm of a constant functional is exact") {
  const auto e = lp_norm_mc([](std::size_t) { return -2.5; }, 3.0, 50);
  CHECK(e.value == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(e.se == 0.0);
}

TEST_CASE("L_p norms of Gaussian samples") {
  const auto z = gaussian(100000, 5);
  const auto e2 = lp_norm(z, 2.0);
  CHECK(std::abs(e2.value - 1.0) <= 3.0 * e2.se);
  const auto e4 = lp_norm(z, 4.0);
  CHECK(std::abs(e4.value - std::pow(3.0, 0.25)) <= 3.0 * e4.se);
}

TEST_CASE("L_p norm rejects bad input") {
  CHECK_THROWS_WITH(lp_norm(std::vector<double>{1.0, NAN, 2.0}, 2.0), doctest::Contains("index 1"));
  CHECK_THROWS(lp_norm(std::vector<double>{1.0, 2.0}, 0.5));
  CHECK_THROWS(lp_norm_mc([](std::size_t) { return 1.0; }, 2.0, 1));
}

TEST_CASE("rate fit on exact power laws") {
  const std::vector<double> ns{16, 32, 64, 128};
  std::vector<double> half, one;
  for (double n : ns) {
    half.push_back(3.0 * std::pow(n, -0.5));
    one.push_back(0.7 / n);
  }
  const auto f = rate_fit(ns, half);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(rate_fit(ns, one).slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
}

TEST_CASE("rate fit input checks") {
  CHECK_THROWS(rate_fit(std::vector<double>{1, 2}, std::vector<double>{1, 1}));
  CHECK_THROWS(rate_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0, 1}));
  CHECK_THROWS(rate_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, -1, 1}));
  CHECK_THROWS(rate_fit(std::vector<double>{1, 3, 2}, std::vector<double>{1, 1, 1}));
}

TEST_CASE("rate fit confidence intervals cover the true slope about 95% of the time") {
  const std::vector<double> ns{16, 32, 64, 128, 256, 512, 1024};
  auto eng = make_engine({99, 0, 0});
  std::normal_distribution<double> z;
  std::size_t covered_w = 0, covered_u = 0;
  const std::size_t reps = 500;
  for (std::size_t r = 0; r < reps; ++r) {
    std::vector<double> e, se;
    for (double n : ns) {
      const double truth = 2.0 * std::pow(n, -0.5);
      const double sd = 0.03 * truth;  // 3% relative noise
      e.push_back(truth + sd * z(eng));
      se.push_back(sd);
    }
    const auto fw = rate_fit(ns, e, se);
    if (fw.slope_lo <= -0.5 && -0.5 <= fw.slope_hi) ++covered_w;
    const auto fu = rate_fit(ns, e);
    if (fu.slope_lo <= -0.5 && -0.5 <= fu.slope_hi) ++covered_u;
  }
  const double cw = static_cast<double>(covered_w) / reps, cu = static_cast<double>(covered_u) / reps;
  CHECK(cw >= 0.92);
  CHECK(cw <= 0.98);
  CHECK(cu >= 0.92);
  CHECK(cu <= 0.98);
}

TEST_CASE("KS and W1 on identical and shifted samples") {
  const auto a = gaussian(20000, 1);
  CHECK(ks_statistic(a, a) == 0.0);
  CHECK(w1_distance(a, a) == 0.0);
  const auto b = gaussian(20000, 2, 0.5);
  const double w = w1_distance(a, b);
  const double se = w1_bootstrap_se(a, b, 100, 3);
  CHECK(std::abs(w - 0.5) <= 3.0 * se);
  const double ks = ks_statistic(a, b);
  CHECK(ks > 0.0);
  CHECK(ks <= 1.0);
}

TEST_CASE("W1 and KS for unequal sample sizes") {
  const std::vector<double> a{0.0, 1.0}, b{0.0, 0.5, 1.0, 2.0};
  // F_a - G_b on [0, .5): 1/2 - 1/4; [.5, 1): 1/2 - 1/2; [1, 2): 1 - 3/4
  CHECK(w1_distance(a, b) == doctest::Approx(0.25 * 0.5 + 0.25 * 1.0));
  CHECK(ks_statistic(a, b) == doctest::Approx(0.25));
  CHECK(w1_distance(std::vector<double>{0.0}, std::vector<double>{3.0}) == 3.0);
  CHECK(ks_statistic(std::vector<double>{0.0}, std::vector<double>{3.0}) == 1.0);
}

TEST_CASE("permutation floor is near the same-law W1") {
  const auto a = gaussian(10000, 11), b = gaussian(10000, 12);
  const double floor = w1_permutation_floor(a, b, 20, 4);
  CHECK(floor > 0.0);
  CHECK(w1_distance(a, b) < 3.0 * floor);
  CHECK(floor == w1_permutation_floor(a, b, 20, 4));
}

TEST_CASE("parallel map is independent of the worker count") {
  auto f = [](std::size_t i) {
    const auto z = gaussian(10, i);
    return pairwise_sum(z);
  };
  const auto s = parallel_map(257, 1, f);
  const auto p = parallel_map(257, 4, f);
  CHECK(s == p);
  CHECK_THROWS_WITH(parallel_map(100, 3,
                                 [](std::size_t i) -> int {
                                   if (i == 17 || i == 60) throw std::runtime_error("bad " + std::to_string(i));
                                   return 0;
                                 }),
                    "bad 17");
}

TEST_CASE("thread cap resolution") {
  CHECK(resolve_threads(3) == 3);
  setenv("EMCLT_THREADS", "5", 1);
  CHECK(resolve_threads() == 5);
  unsetenv("EMCLT_THREADS");
  CHECK(resolve_threads() >= 1);
}
