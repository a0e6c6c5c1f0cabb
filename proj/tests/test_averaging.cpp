#include "doctest.h"

#include <cmath>

#include "emclt/averaging.hpp"
#include "emclt/presets.hpp"

using namespace emclt;

namespace {
ModelSpec model(const std::string& drift, PresetParams dp = {}, std::size_t dim = 1) {
  ModelChoice c;
  c.drift = drift;
  c.drift_params = std::move(dp);
  c.dim = dim;
  return make_model(c);
}
}  // namespace

TEST_CASE("closed-form lacunary mollification agrees with Gauss-Hermite quadrature") {
  const Drift lac = make_drift("holder-lacunary", {{"alpha", 0.5}, {"K", 3}}, 1);
  // Same function without series metadata forces the quadrature route; the
  // top frequency 2^3 keeps the 32-node rule accurate.
  const Drift plain = Drift::smooth("plain", 1, lac.value_field(),
                                    [](std::span<const double>, std::span<double> o) { o[0] = 0; });
  const double delta = 0.3;
  const Drift a = mollify(lac, delta);
  const Drift b = mollify(plain, delta);
  CHECK(a.regularity() == Regularity::smooth);
  for (double x : {-1.3, 0.0, 0.42, 2.2}) {
    double va = 0, vb = 0, ga = 0, gb = 0;
    a.value({&x, 1}, {&va, 1});
    b.value({&x, 1}, {&vb, 1});
    a.jacobian({&x, 1}, {&ga, 1});
    b.jacobian({&x, 1}, {&gb, 1});
    CHECK(va == doctest::Approx(vb).epsilon(1e-6));
    CHECK(ga == doctest::Approx(gb).epsilon(1e-5));
  }
}

TEST_CASE("mollifying a linear map leaves it unchanged") {
  const Drift lin = make_drift("linear", {{"a", 2.0}}, 2);
  const Drift m = mollify(lin, 0.7);
  std::vector<double> x{0.3, -0.8}, v(2), j(4);
  m.value(x, v);
  m.jacobian(x, j);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(-1.6));
  CHECK(j[0] == doctest::Approx(2.0));
  CHECK(std::abs(j[1]) < 1e-12);
  CHECK(j[3] == doctest::Approx(2.0));
}

TEST_CASE("mollification argument checks") {
  const Drift lin = make_drift("linear", {}, 1);
  CHECK_THROWS(mollify(lin, 0.0));
  CHECK_THROWS(mollify(lin, -1.0));
  CHECK_THROWS(mollify(make_drift("linear", {}, 4), 0.1));
  CHECK(default_delta(16) == 0.25);
  CHECK_THROWS(default_delta(0));
}

TEST_CASE("Q^X of a linear drift is a t I") {
  const ModelSpec m = model("linear", {{"a", -1.5}}, 2);
  const auto b = sample_brownian(TimeGrid(8, 8), 2, {1, 0, 0});
  const auto x = reference_solution(m, b);
  const auto l = qx_operator(m.drift, x, 0.0);
  CHECK(l.values.provenance == MatrixProvenance::occupation);
  for (std::size_t j = 0; j <= 64; j += 8) {
    CHECK(l.values.entry(j, 0, 0) == doctest::Approx(-1.5 * j / 64.0).epsilon(1e-13));
    CHECK(std::abs(l.values.entry(j, 0, 1)) < 1e-15);
  }
}

TEST_CASE("Q^X requires delta > 0 for non-smooth drifts and a fine path") {
  const ModelSpec m = model("holder-lacunary");
  const auto b = sample_brownian(TimeGrid(8, 4), 1, {1, 0, 0});
  const auto x = reference_solution(m, b);
  CHECK_THROWS(qx_operator(m.drift, x, 0.0));
  CHECK_NOTHROW(qx_operator(m.drift, x, 0.1));
  const auto coarse = euler_maruyama(m, b, 8);
  CHECK_THROWS(qx_operator(m.drift, coarse, 0.1));
}

TEST_CASE("Holder seminorm on closed forms") {
  std::vector<double> lin(65), sq(65);
  for (std::size_t j = 0; j <= 64; ++j) {
    const double t = j / 64.0;
    lin[j] = 3.0 * t;
    sq[j] = std::sqrt(t);
  }
  const auto e1 = holder_seminorm(lin, 1, 1.0);
  CHECK(e1.value == doctest::Approx(3.0));
  CHECK(e1.gaps.size() == 7);
  // sqrt(t) is exactly 1/2-Holder with constant 1 (attained at s = 0).
  CHECK(holder_seminorm(sq, 1, 0.5).value == doctest::Approx(1.0));
  CHECK(holder_seminorm(lin, 1, 0.5, 0.25).gaps.size() == 5);
  CHECK(holder_seminorm(std::vector<double>{1.0}, 1, 0.5).degenerate);
  CHECK_THROWS(holder_seminorm(lin, 1, 0.0));
  CHECK_THROWS(holder_seminorm(lin, 2, 0.5));
}

TEST_CASE("mollified Q^X converges as delta shrinks for a smooth drift") {
  const ModelSpec m = model("smooth-tanh");
  const auto b = sample_brownian(TimeGrid(16, 16), 1, {4, 0, 0});
  const auto x = reference_solution(m, b);
  const auto exact = qx_operator(m.drift, x, 0.0);
  double prev = 1e9;
  for (double delta : {0.2, 0.1, 0.05}) {
    const auto l = qx_operator(m.drift, x, delta);
    const double err = std::abs(l.values.entry(256, 0, 0) - exact.values.entry(256, 0, 0));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}
