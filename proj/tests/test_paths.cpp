#include "doctest.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "emclt/paths.hpp"
#include "emclt/stats.hpp"

using namespace emclt;

TEST_CASE("time grid geometry") {
  const TimeGrid g(8, 4);
  CHECK(g.fine_steps() == 32);
  CHECK(g.fine_nodes() == 33);
  CHECK(g.fine_time(16) == 0.5);
  CHECK(g.kappa_node(7) == 4);
  CHECK(g.kappa_node(8) == 8);
  CHECK(g.kappa(0.49) == 0.375);
  CHECK(g.kappa(1.0) == 1.0);
  CHECK(g.fine_index_of(0.25) == 8);
  CHECK_THROWS(g.fine_index_of(0.3));
  CHECK_THROWS(TimeGrid(0, 4));
  CHECK_THROWS(TimeGrid(4, 0));
}

TEST_CASE("nM = 1 grid") {
  const TimeGrid g(1, 1);
  const BrownianPath b = sample_brownian(g, 1, {3, 0, 0});
  CHECK(b.steps() == 1);
  CHECK(b.values().size() == 2);
  CHECK(b.values()[1] == b.increment(0)[0]);
}

TEST_CASE("grid overflow guarded") {
  CHECK_THROWS_AS(TimeGrid(std::size_t{1} << 30, std::size_t{1} << 20), std::overflow_error);
}

TEST_CASE("streams are reproducible and independent of creation order") {
  const TimeGrid g(4, 8);
  const auto a1 = sample_brownian(g, 2, {11, 5, 1});
  const auto other = sample_brownian(g, 2, {11, 6, 1});
  const auto a2 = sample_brownian(g, 2, {11, 5, 1});
  CHECK(std::equal(a1.increments().begin(), a1.increments().end(), a2.increments().begin()));
  CHECK(a1.increments()[0] != other.increments()[0]);
  const auto tagged = sample_brownian(g, 2, {11, 5, 2});
  CHECK(a1.increments()[0] != tagged.increments()[0]);
}

TEST_CASE("increments have variance equal to the fine step") {
  const TimeGrid g(64, 64);
  const auto b = sample_brownian(g, 1, {1, 0, 0});
  std::vector<double> sq;
  for (double v : b.increments()) sq.push_back(v * v * static_cast<double>(g.fine_steps()));
  const Estimate m = mean_estimate(sq);
  CHECK(std::abs(m.value - 1.0) < 4.0 * m.se);
}

TEST_CASE("coarsening sums increments and keeps the terminal value") {
  const TimeGrid g(4, 16);
  const auto b = sample_brownian(g, 3, {7, 0, 0});
  const auto c = coarsen(b, 4);
  CHECK(c.grid() == TimeGrid(4, 4));
  CHECK(c.dim() == 3);
  const auto t1 = b.terminal(), t2 = c.terminal();
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(t1[k] - t2[k]) <= 1e-13 * (1.0 + std::abs(t1[k])));
  double s = 0.0;
  for (std::size_t j = 0; j < 4; ++j) s += b.increment(j)[1];
  CHECK(c.increment(0)[1] == doctest::Approx(s).epsilon(1e-15));
  // composition: coarsen(coarsen(b, 2), 8) == coarsen(b, 16)
  const auto c2 = coarsen(coarsen(b, 2), 8);
  const auto c3 = coarsen(b, 16);
  for (std::size_t j = 0; j < c3.steps(); ++j) {
    CHECK(std::abs(c2.increment(j)[0] - c3.increment(j)[0]) <= 1e-13);
  }
  CHECK_THROWS(coarsen(b, 5));
}

TEST_CASE("Brownian path construction validates sizes") {
  const TimeGrid g(2, 2);
  CHECK_THROWS(BrownianPath(g, 1, std::vector<double>(3)));
  CHECK_THROWS(BrownianPath(g, 0, std::vector<double>{}));
  CHECK_NOTHROW(BrownianPath(g, 2, std::vector<double>(8)));
}
