#include "doctest.h"

#include <cmath>

#include "emclt/model.hpp"
#include "emclt/presets.hpp"

using namespace emclt;

TEST_CASE("lacunary recurrence matches term-by-term evaluation") {
  const auto s = LacunarySeries::standard(0.5, 14);
  for (double x : {-3.7, -0.2, 0.0, 0.9, 2.5, 11.0}) {
    double v = 0.0, dv = 0.0;
    s.value_and_derivative(x, v, dv);
    CHECK(v == doctest::Approx(s.value_direct(x)).epsilon(1e-12));
    CHECK(dv == doctest::Approx(s.derivative_direct(x)).epsilon(1e-10));
    CHECK(s.value(x) == doctest::Approx(v).epsilon(1e-15));
  }
  CHECK(s.envelope_constant() == doctest::Approx(1.0));
}

TEST_CASE("lacunary derivative against a central difference") {
  const auto s = LacunarySeries::standard(0.5, 6);
  const double x = 0.37, h = 1e-6;
  const double fd = (s.value_direct(x + h) - s.value_direct(x - h)) / (2 * h);
  CHECK(s.derivative_direct(x) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("drift presets carry regularity metadata") {
  CHECK(make_drift("smooth-tanh", {}, 1).regularity() == Regularity::smooth);
  const Drift h = make_drift("holder-lacunary", {{"alpha", 0.5}}, 2);
  CHECK(h.regularity() == Regularity::holder);
  CHECK(h.alpha() == 0.5);
  CHECK(h.series() != nullptr);
  const Drift s = make_drift("sobolev-bump", {}, 1);
  CHECK(s.regularity() == Regularity::sobolev);
  CHECK_FALSE(s.has_gradient());
  double out = 0.0, x = 2.0;
  CHECK_THROWS_AS(s.jacobian({&x, 1}, {&out, 1}), std::logic_error);
  CHECK(s.support_radius() == 1.0);
  s.value({&x, 1}, {&out, 1});
  CHECK(out == 0.0);
  x = 0.0;
  s.value({&x, 1}, {&out, 1});
  CHECK(out == 1.5);
}

TEST_CASE("tanh drift Jacobian") {
  const Drift d = make_drift("smooth-tanh", {}, 2);
  std::vector<double> x{0.3, -1.1}, jac(4);
  d.jacobian(x, jac);
  CHECK(jac[0] == doctest::Approx(-2.0 / std::pow(std::cosh(0.3), 2)));
  CHECK(jac[1] == 0.0);
  CHECK(jac[2] == 0.0);
  CHECK(jac[3] == doctest::Approx(-2.0 / std::pow(std::cosh(-1.1), 2)));
}

TEST_CASE("preset errors") {
  CHECK_THROWS(make_drift("nope", {}, 1));
  CHECK_THROWS(make_drift("linear", {{"b", 1.0}}, 1));
  CHECK_THROWS(make_drift("sobolev-bump", {{"alpha", 1.2}, {"m", 2.0}}, 1));
  double lambda = 0.0;
  CHECK_THROWS(make_diffusion("sin-modulated", {{"amp", 1.0}}, 1, lambda));
  CHECK_THROWS(make_diffusion("unknown", {}, 1, lambda));
}

TEST_CASE("sin-modulated diffusion derivatives and ellipticity") {
  double lambda = 0.0;
  const Diffusion s = make_diffusion("sin-modulated", {{"amp", 0.5}}, 1, lambda);
  CHECK(lambda == 0.5);
  double x = 0.4, v = 0, g = 0, h = 0;
  s.value({&x, 1}, {&v, 1});
  s.grad({&x, 1}, {&g, 1});
  s.hess({&x, 1}, {&h, 1});
  CHECK(v == doctest::Approx(1.0 + 0.5 * std::sin(0.4)));
  CHECK(g == doctest::Approx(0.5 * std::cos(0.4)));
  CHECK(h == doctest::Approx(-0.5 * std::sin(0.4)));
}

TEST_CASE("model validation and assumption report") {
  ModelChoice c;
  c.drift = "holder-lacunary";
  c.dim = 2;
  const ModelSpec m = make_model(c);
  const auto rep = check_assumptions(m);
  CHECK(rep.ok());
  CHECK(rep.min_ellipticity_ratio >= 1.0);
  CHECK(rep.max_sigma == doctest::Approx(1.5).epsilon(1e-2));
  CHECK(rep.lacunary_envelope == doctest::Approx(1.0));

  ModelChoice bad = c;
  bad.lambda = 0.9;  // sin-modulated(0.5) only guarantees 0.5
  CHECK_THROWS_AS(make_model(bad), std::invalid_argument);
  ModelChoice wrong_x0 = c;
  wrong_x0.x0 = {1.0};
  CHECK_THROWS_AS(make_model(wrong_x0), std::invalid_argument);
}

TEST_CASE("preset listing") {
  const std::string s = list_presets();
  CHECK(s.find("holder-lacunary(alpha=0.5)") != std::string::npos);
  const auto tanh = s.find("smooth-tanh");
  REQUIRE(tanh != std::string::npos);
  CHECK(s.substr(tanh, 60).find("C^inf") != std::string::npos);
  const auto bump = s.find("sobolev-bump(alpha=0.5, m=2)");
  REQUIRE(bump != std::string::npos);
  CHECK(s.substr(bump, 140).find("compact support") != std::string::npos);
  CHECK(s == list_presets());
  for (const char* name : {"zero", "constant", "linear", "smooth-tanh", "holder-lacunary", "sobolev-bump"}) {
    CHECK(is_drift_preset(name));
  }
  CHECK_FALSE(is_drift_preset("identity"));
  CHECK(is_diffusion_preset("identity"));
}
