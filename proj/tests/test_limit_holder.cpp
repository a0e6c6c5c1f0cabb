#include "doctest.h"

#include <cmath>

#include "emclt/averaging.hpp"
#include "emclt/limit_holder.hpp"
#include "emclt/presets.hpp"

using namespace emclt;

namespace {

ModelSpec model(const std::string& drift, const std::string& diffusion, std::size_t dim = 1) {
  ModelChoice c;
  c.drift = drift;
  c.diffusion = diffusion;
  c.dim = dim;
  return make_model(c);
}

SamplePath path_from(const TimeGrid& g, std::size_t dim, auto fn) {
  SamplePath p;
  p.grid = g;
  p.dim = dim;
  p.steps = g.fine_steps();
  for (std::size_t j = 0; j <= p.steps; ++j) {
    for (std::size_t k = 0; k < dim; ++k) p.values.push_back(fn(g.fine_time(j), k));
  }
  return p;
}

MatrixPath matrix_from(const TimeGrid& g, std::size_t dim, auto fn) {
  MatrixPath p;
  p.grid = g;
  p.dim = dim;
  for (std::size_t j = 0; j <= g.fine_steps(); ++j) {
    for (std::size_t e = 0; e < dim * dim; ++e) p.values.push_back(fn(g.fine_time(j), e));
  }
  return p;
}

}  // namespace

TEST_CASE("Young sums: constant integrand against a linear integrator") {
  const TimeGrid g(64, 1);
  const auto z = path_from(g, 2, [](double, std::size_t k) { return k == 0 ? 1.5 : -2.0; });
  const auto l = matrix_from(g, 2, [](double t, std::size_t e) { return (e + 1.0) * t; });
  const YoungPair pair(z, l, 0.6, 0.6);
  const auto full = young_integral(pair, 64);
  CHECK(std::abs(full[0] - (1.5 * 1.0 - 2.0 * 2.0)) < 1e-12);
  CHECK(std::abs(full[1] - (1.5 * 3.0 - 2.0 * 4.0)) < 1e-12);
  const auto half = young_integral(pair, 32);
  CHECK(std::abs(half[0] - 0.5 * (1.5 - 4.0)) < 1e-12);
  const auto sub = young_integral_subsampled(pair, 8);
  CHECK(std::abs(sub[1] - full[1]) < 1e-12);
}

TEST_CASE("Young sums: any integrand against a constant integrator vanish") {
  const TimeGrid g(32, 1);
  const auto z = path_from(g, 1, [](double t, std::size_t) { return std::sin(7 * t); });
  const auto l = matrix_from(g, 1, [](double, std::size_t) { return 4.0; });
  CHECK(young_integral(YoungPair(z, l, 0.6, 0.6), 32)[0] == 0.0);
}

TEST_CASE("Young pair construction") {
  const TimeGrid g(16, 1);
  const auto z = path_from(g, 1, [](double t, std::size_t) { return t; });
  const auto l = matrix_from(g, 1, [](double t, std::size_t) { return t; });
  CHECK_THROWS(YoungPair(z, l, 0.5, 0.5));
  CHECK_NOTHROW(YoungPair(z, l, 0.5, 0.5, true));
  const auto l_other = matrix_from(TimeGrid(8, 1), 1, [](double t, std::size_t) { return t; });
  CHECK_THROWS(YoungPair(z, l_other, 0.6, 0.6));
  const YoungPair pair(z, l, 0.6, 0.6);
  CHECK_THROWS(young_integral(pair, 17));
  CHECK_THROWS(young_integral_subsampled(pair, 3));
}

TEST_CASE("claimed Holder exponent of V") {
  CHECK(claimed_beta(0.5) == doctest::Approx(0.45));
  CHECK(claimed_beta(0.0) == doctest::Approx(0.45));
  CHECK(claimed_beta(-0.5) == doctest::Approx(0.2));
}

TEST_CASE("refinement cascade of the synthetic pair decays") {
  std::vector<YoungPair> pairs;
  for (std::uint64_t s = 0; s < 4; ++s) pairs.push_back(synthetic_young_pair(0.55, 0.55, 12, 20, s));
  const auto c = refinement_cascade(pairs, 2);
  CHECK(c.levels.size() == 10);
  CHECK(c.exponent > 0.0);
  CHECK(synthetic_young_pair(0.55, 0.55, 10, 20, 3).integrand().values ==
        synthetic_young_pair(0.55, 0.55, 10, 20, 3).integrand().values);
}

struct LimitFixture {
  ModelSpec m = model("smooth-tanh", "sin-modulated", 2);
  TimeGrid g{16, 16};
  BrownianPath b = sample_brownian(g, 2, {8, 0, 1});
  MatrixPath w = brownian_matrix_path(sample_brownian(g, 4, {8, 0, 2}), 2);
  SamplePath x = reference_solution(m, b);
  OccupationDerivative l = qx_operator(m.drift, x, 0.0);
};

TEST_CASE_FIXTURE(LimitFixture, "homogeneous limit equation stays at zero") {
  LimitOptions opt;
  opt.forcing_term = false;
  const auto v = solve_limit_holder(m, x, l, b, w, opt);
  for (double c : v.v.values) CHECK(c == 0.0);
  LimitOptions zero_w;
  zero_w.forcing_scale = 0.0;
  const auto v2 = solve_limit_holder(m, x, l, b, w, zero_w);
  for (double c : v2.v.values) CHECK(c == 0.0);
}

TEST_CASE_FIXTURE(LimitFixture, "summation order changes results only by rounding") {
  LimitOptions rev;
  rev.order = SummationOrder::reverse;
  const auto a = solve_limit_holder(m, x, l, b, w);
  const auto r = solve_limit_holder(m, x, l, b, w, rev);
  CHECK(r.order == SummationOrder::reverse);
  for (std::size_t i = 0; i < a.v.values.size(); ++i) {
    CHECK(std::abs(a.v.values[i] - r.v.values[i]) <= 1e-12 * (1.0 + std::abs(a.v.values[i])));
  }
}

TEST_CASE_FIXTURE(LimitFixture, "limit solver rejects mismatched or dependent drivers") {
  LimitOptions strict;
  strict.require_independent_w = true;
  const auto area = area_process(b, 16);
  CHECK_THROWS(solve_limit_holder(m, x, l, b, area, strict));
  CHECK_NOTHROW(solve_limit_holder(m, x, l, b, area));
  const auto b_other = sample_brownian(TimeGrid(16, 8), 2, {8, 0, 1});
  CHECK_THROWS(solve_limit_holder(m, x, l, b_other, w));
}

TEST_CASE("Euler limit solution tracks the variation-of-constants formula in d = 1") {
  const ModelSpec m = model("smooth-tanh", "sin-modulated");
  const TimeGrid g(64, 64);
  double sq = 0.0;
  const std::size_t paths = 40;
  for (std::size_t i = 0; i < paths; ++i) {
    const auto b = sample_brownian(g, 1, {21, i, 1});
    const auto w = brownian_matrix_path(sample_brownian(g, 1, {21, i, 2}), 1);
    const auto x = reference_solution(m, b);
    const auto l = qx_operator(m.drift, x, 0.0);
    const double v = solve_limit_holder(m, x, l, b, w).v.values.back();
    const double o = voc_oracle_1d(m, x, b, w);
    sq += (v - o) * (v - o);
  }
  CHECK(std::sqrt(sq / paths) < 1e-2);
  CHECK_THROWS(voc_oracle_1d(model("sobolev-bump", "identity"), SamplePath{}, sample_brownian(g, 1, {}),
                             MatrixPath{}));
}
