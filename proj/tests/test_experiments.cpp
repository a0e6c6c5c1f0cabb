#include "doctest.h"

#include <cmath>

#include "emclt/experiments.hpp"

using namespace emclt;

namespace {
ModelSpec model(const std::string& drift, const std::string& diffusion, PresetParams dp = {},
                PresetParams sp = {}) {
  ModelChoice c;
  c.drift = drift;
  c.drift_params = std::move(dp);
  c.diffusion = diffusion;
  c.diffusion_params = std::move(sp);
  return make_model(c);
}
}  // namespace

TEST_CASE("strong rate is degenerate when the scheme is exact") {
  StrongRateConfig cfg{model("zero", "identity"), {4, 8, 16}, 8, 200, 2.0};
  const auto rep = strong_rate_experiment(cfg, {3, 2});
  CHECK(rep.degenerate);
  CHECK_FALSE(rep.error_fit.has_value());
  // X^n and the reference differ only by summation order of the same increments.
  for (const auto& r : rep.rows) CHECK(r.sup_error.value <= 1e-14);
  // The step statistic of X^n = B still decays like n^{-1/2}.
  REQUIRE(rep.step_pointwise_fit.has_value());
  CHECK(rep.step_pointwise_fit->slope == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("strong rate runs are independent of the worker count") {
  StrongRateConfig cfg{model("smooth-tanh", "sin-modulated"), {4, 8, 16}, 8, 300, 2.0};
  const auto a = strong_rate_experiment(cfg, {11, 1});
  const auto b = strong_rate_experiment(cfg, {11, 4});
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].sup_error.value == b.rows[i].sup_error.value);
    CHECK(a.rows[i].step_pointwise == b.rows[i].step_pointwise);
  }
  const auto c = strong_rate_experiment(cfg, {12, 1});
  CHECK(c.rows[0].sup_error.value != a.rows[0].sup_error.value);
}

TEST_CASE("quadrature with constant f is degenerate") {
  QuadratureConfig cfg;
  cfg.model = model("smooth-tanh", "sin-modulated");
  cfg.f.kind = FunctionSpec::Kind::constant;
  cfg.f.value = 2.0;
  cfg.ns = {4, 8, 16};
  cfg.refinement = 8;
  cfg.n_paths = 100;
  const auto rep = quadrature_experiment(cfg, {5, 1});
  CHECK(rep.degenerate);
  CHECK_FALSE(rep.fit.has_value());
  cfg.ns = {4, 8};
  CHECK_THROWS_AS(quadrature_experiment(cfg, {5, 1}), std::invalid_argument);
}

TEST_CASE("quadrature with smooth f decays at rate one") {
  QuadratureConfig cfg;
  cfg.model = model("smooth-tanh", "sin-modulated");
  cfg.f.kind = FunctionSpec::Kind::preset;
  cfg.f.preset = "smooth-tanh";
  cfg.ns = {8, 16, 32, 64};
  cfg.refinement = 16;
  cfg.n_paths = 2000;
  const auto rep = quadrature_experiment(cfg, {6, 4});
  REQUIRE(rep.fit.has_value());
  CHECK(rep.fit->slope < -0.8);
  CHECK(cfg.f.label() == "smooth-tanh[0]");
}

TEST_CASE("Q^X stability on a short schedule") {
  QxStabilityConfig cfg;
  cfg.model = model("holder-lacunary", "sin-modulated");
  cfg.n = 64;
  cfg.refinement = 16;
  cfg.n_paths = 4;
  const auto rep = qx_stability_experiment(cfg, {7, 2});
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[0].delta == doctest::Approx(0.125));
  CHECK(rep.rows[0].distance_mean == 0.0);
  CHECK(rep.rows[3].delta == doctest::Approx(0.125 / 8));
  CHECK(rep.gamma == doctest::Approx(0.7));
  CHECK(rep.seminorm_ratio >= 1.0);
}

TEST_CASE("CLT refuses small banks") {
  CltConfig cfg;
  cfg.model = model("smooth-tanh", "sin-modulated");
  cfg.ns = {4, 8, 16, 32};
  cfg.n_paths = 999;
  CHECK_THROWS_AS(clt_experiment(cfg, {1, 1}), std::invalid_argument);
  cfg.n_paths = 1000;
  cfg.ns = {4, 8, 16};
  CHECK_THROWS_AS(clt_experiment(cfg, {1, 1}), std::invalid_argument);
}

TEST_CASE("CLT with additive noise has a vanishing limit") {
  CltConfig cfg;
  cfg.model = model("linear", "constant", {{"a", -1.0}}, {{"s", 0.7}});
  cfg.ns = {4, 8, 16, 32};
  cfg.refinement = 8;
  cfg.n_paths = 1000;
  cfg.limit_paths = 1000;
  cfg.limit_n = 32;
  cfg.times = {1.0};
  cfg.bootstrap = 20;
  cfg.floor_splits = 4;
  const auto rep = clt_experiment(cfg, {9, 4});
  REQUIRE(rep.rows.size() == 4);
  REQUIRE(rep.trends.size() == 1);
  CHECK(rep.trends[0].monotone);
  // V^n = O(n^{-1/2}) when sigma is constant, so W1 to the point mass shrinks.
  CHECK(rep.trends[0].ratio < 0.5);
  CHECK(rep.rows.back().w1 < 0.05);
}

TEST_CASE("Zvonkin sweep respects the maximum principle") {
  ZvonkinSweepConfig cfg{model("sobolev-bump", "sin-modulated"), {4.0, 16.0, 64.0}, 8.0, {401, 200}};
  const auto rep = zvonkin_sweep(cfg);
  REQUIRE(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    CHECK(r.sup_u <= r.max_principle_bound * (1.0 + 1e-6));
    CHECK(r.max_residual < 1e-6);
  }
  CHECK(rep.rows[2].sup_grad < rep.rows[0].sup_grad);
  CHECK(rep.table.fitted);
}

TEST_CASE("area check reproduces the discrete variance and the diagonal decay") {
  AreaCheckConfig cfg{2, 4, {4, 16, 64}, 20000};
  const auto rep = area_check(cfg, {13, 4});
  REQUIRE(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    CHECK(r.var_expected == 1.0 - 1.0 / static_cast<double>(r.refinement));
    REQUIRE(r.var.size() == 4);
    for (const auto& v : r.var) CHECK(std::abs(v.value - r.var_expected) <= 4.0 * v.se);
  }
  REQUIRE(rep.diag_fit.has_value());
  CHECK(rep.diag_fit->slope >= -0.6);
  CHECK(rep.diag_fit->slope <= -0.4);
  const auto again = area_check(cfg, {13, 1});
  CHECK(again.rows[1].var[1].value == rep.rows[1].var[1].value);
}
