#include "doctest.h"

#include <cmath>

#include "emclt/presets.hpp"
#include "emclt/scheme.hpp"

using namespace emclt;

namespace {
ModelSpec model(const std::string& drift, const std::string& diffusion, std::size_t dim = 1,
                PresetParams dp = {}) {
  ModelChoice c;
  c.drift = drift;
  c.drift_params = std::move(dp);
  c.diffusion = diffusion;
  c.dim = dim;
  return make_model(c);
}
}  // namespace

TEST_CASE("coarse Euler and the fine interpolant agree bitwise at coarse nodes") {
  for (const char* drift : {"smooth-tanh", "holder-lacunary", "sobolev-bump"}) {
    const ModelSpec m = model(drift, "sin-modulated", 2);
    const TimeGrid g(16, 8);
    const auto b = sample_brownian(g, 2, {5, 1, 0});
    const auto coarse = euler_maruyama(m, b, 16);
    const auto fine = euler_maruyama_fine(m, b, 16);
    CHECK(coarse.level == GridLevel::coarse);
    for (std::size_t c = 0; c <= 16; ++c) {
      for (std::size_t k = 0; k < 2; ++k) CHECK(coarse.at(c)[k] == fine.at(c * 8)[k]);
    }
  }
}

TEST_CASE("zero drift and unit diffusion: Euler equals x0 + B at coarse nodes") {
  const ModelSpec m = model("zero", "identity");
  const TimeGrid g(8, 4);
  const auto b = sample_brownian(g, 1, {2, 0, 0});
  const auto xn = euler_maruyama(m, b, 8);
  const auto bv = b.values();
  for (std::size_t c = 0; c <= 8; ++c) CHECK(xn.at(c)[0] == doctest::Approx(bv[c * 4]).epsilon(1e-13));
}

TEST_CASE("constant drift with zero noise increments is exact") {
  const ModelSpec m = model("constant", "identity", 1, {{"c", 2.0}});
  const TimeGrid g(4, 4);
  const BrownianPath b(g, 1, std::vector<double>(16, 0.0));
  const auto x = reference_solution(m, b);
  for (std::size_t j = 0; j <= 16; ++j) CHECK(x.at(j)[0] == doctest::Approx(2.0 * j / 16.0).epsilon(1e-14));
}

TEST_CASE("linear drift follows the Euler recursion") {
  const ModelSpec m = model("linear", "identity", 1, {{"a", -1.5}});
  const TimeGrid g(8, 2);
  const auto b = sample_brownian(g, 1, {9, 0, 0});
  const auto x = euler_maruyama(m, b, 8);
  const auto c = coarsen(b, 2);
  double y = 0.0;
  for (std::size_t j = 0; j < 8; ++j) {
    y = y + (-1.5 * y) / 8.0 + c.increment(j)[0];
    CHECK(x.at(j + 1)[0] == doctest::Approx(y).epsilon(1e-14));
  }
}

TEST_CASE("level must divide the fine step count") {
  const ModelSpec m = model("zero", "identity");
  const auto b = sample_brownian(TimeGrid(4, 3), 1, {1, 0, 0});
  CHECK_THROWS(euler_maruyama(m, b, 5));
  CHECK_THROWS(euler_maruyama_fine(m, b, 5));
  const auto b2 = sample_brownian(TimeGrid(4, 3), 2, {1, 0, 0});
  CHECK_THROWS(euler_maruyama(m, b2, 4));
}

TEST_CASE("non-finite states raise NumericalError with the step") {
  ModelSpec m = model("zero", "identity");
  m.drift = Drift::smooth(
      "blowup", 1, [](std::span<const double> x, std::span<double> out) { out[0] = x[0] > 0.5 ? NAN : 1.0; },
      [](std::span<const double>, std::span<double> out) { out[0] = 0.0; });
  const BrownianPath b(TimeGrid(4, 1), 1, std::vector<double>(4, 0.0));
  try {
    (void)euler_maruyama(m, b, 4);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.step() == 3);
  }
}

TEST_CASE("fluctuation rescales the difference and checks grids") {
  const ModelSpec m = model("smooth-tanh", "sin-modulated");
  const auto b = sample_brownian(TimeGrid(16, 4), 1, {4, 0, 0});
  const auto bundle = make_bundle(m, b);
  CHECK(bundle.v_n.at(0)[0] == 0.0);
  for (std::size_t j = 0; j <= 64; j += 7) {
    CHECK(bundle.v_n.at(j)[0] == doctest::Approx(4.0 * (bundle.x_ref.at(j)[0] - bundle.x_n.at(j)[0])));
  }
  const auto coarse = euler_maruyama(m, b, 16);
  CHECK_THROWS_WITH(fluctuation(bundle.x_ref, coarse, 16), doctest::Contains("grid mismatch"));
}

TEST_CASE("area process: degenerate without refinement, diagonal identity per coarse step") {
  const auto b1 = sample_brownian(TimeGrid(8, 1), 2, {1, 0, 0});
  const auto w1 = area_process(b1, 8);
  CHECK(w1.degenerate);
  for (double v : w1.values) CHECK(v == 0.0);

  const std::size_t n = 4, m = 32;
  const auto b = sample_brownian(TimeGrid(n, m), 2, {3, 0, 0});
  const auto w = area_process(b, n);
  CHECK_FALSE(w.degenerate);
  CHECK(w.provenance == MatrixProvenance::area_process);
  const auto bv = b.values();
  const double scale = std::sqrt(2.0 * n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < 2; ++k) {
      const double db = bv[(c + 1) * m * 2 + k] - bv[c * m * 2 + k];
      double qv = 0.0;
      for (std::size_t j = c * m; j < (c + 1) * m; ++j) qv += b.increment(j)[k] * b.increment(j)[k];
      const double dw = w.entry((c + 1) * m, k, k) - w.entry(c * m, k, k);
      // exact discrete identity: sum S dB = (S_end^2 - sum dB^2) / 2
      CHECK(dw == doctest::Approx(scale * (db * db - qv) / 2.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("independent Brownian matrix path") {
  const auto raw = sample_brownian(TimeGrid(4, 4), 4, {1, 0, 9});
  const auto w = brownian_matrix_path(raw, 2);
  CHECK(w.provenance == MatrixProvenance::independent_brownian);
  CHECK(w.entry(16, 1, 0) == doctest::Approx(raw.terminal()[2]));
  CHECK_THROWS(brownian_matrix_path(raw, 3));
}
