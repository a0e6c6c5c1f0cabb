#include "emclt/averaging.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace emclt {

namespace {

struct GaussRule {
  std::vector<double> nodes;    // standard-normal abscissae
  std::vector<double> weights;  // sum to one
};

// Golub-Welsch for the physicists' Hermite weight, rescaled to N(0, 1).
GaussRule gauss_hermite(std::size_t count) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count),
                                                 static_cast<Eigen::Index>(count));
  for (std::size_t i = 1; i < count; ++i) {
    const double off = std::sqrt(static_cast<double>(i) / 2.0);
    jacobi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = off;
    jacobi(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(i)) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussRule rule;
  for (std::size_t i = 0; i < count; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double v0 = eig.eigenvectors()(0, ii);
    rule.nodes.push_back(std::numbers::sqrt2 * eig.eigenvalues()(ii));
    rule.weights.push_back(v0 * v0);
  }
  return rule;
}

Drift mollify_lacunary(const Drift& drift, double delta) {
  LacunarySeries s = *drift.series();
  double freq = 1.0;
  for (double& a : s.coeffs) {
    const double damp = std::exp(-0.5 * (freq * delta) * (freq * delta));
    a *= damp;
    freq *= 2.0;
  }
  std::ostringstream name;
  name << drift.name() << "*G(" << delta << ")";
  return Drift::lacunary(drift.dim(), std::move(s), name.str(), Regularity::smooth);
}

Drift mollify_quadrature(const Drift& drift, double delta) {
  const std::size_t d = drift.dim();
  std::size_t per_axis = 0;
  switch (d) {
    case 1: per_axis = 32; break;
    case 2: per_axis = 16; break;
    case 3: per_axis = 8; break;
    default:
      throw std::invalid_argument("mollify: quadrature route supports d <= 3");
  }
  const GaussRule rule = gauss_hermite(per_axis);
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= per_axis;

  // Expand the tensor rule once.
  auto points = std::make_shared<std::vector<double>>(total * d);
  auto weights = std::make_shared<std::vector<double>>(total, 1.0);
  for (std::size_t q = 0; q < total; ++q) {
    std::size_t rem = q;
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t i = rem % per_axis;
      rem /= per_axis;
      (*points)[q * d + k] = rule.nodes[i];
      (*weights)[q] *= rule.weights[i];
    }
  }
  const Drift::Field f = drift.value_field();

  auto value = [f, points, weights, delta, d, total](std::span<const double> x,
                                                     std::span<double> out) {
    std::vector<double> y(d), fy(d);
    for (std::size_t l = 0; l < d; ++l) out[l] = 0.0;
    for (std::size_t q = 0; q < total; ++q) {
      for (std::size_t k = 0; k < d; ++k) y[k] = x[k] + delta * (*points)[q * d + k];
      f(y, fy);
      for (std::size_t l = 0; l < d; ++l) out[l] += (*weights)[q] * fy[l];
    }
  };
  auto jacobian = [f, points, weights, delta, d, total](std::span<const double> x,
                                                        std::span<double> out) {
    std::vector<double> y(d), fy(d);
    for (std::size_t i = 0; i < d * d; ++i) out[i] = 0.0;
    for (std::size_t q = 0; q < total; ++q) {
      for (std::size_t k = 0; k < d; ++k) y[k] = x[k] + delta * (*points)[q * d + k];
      f(y, fy);
      for (std::size_t l = 0; l < d; ++l) {
        for (std::size_t j = 0; j < d; ++j) {
          out[l * d + j] += (*weights)[q] * fy[l] * (*points)[q * d + j];
        }
      }
    }
    for (std::size_t i = 0; i < d * d; ++i) out[i] /= delta;
  };
  std::ostringstream name;
  name << drift.name() << "*G(" << delta << ")";
  return Drift::smooth(name.str(), d, value, jacobian);
}

}  // namespace

Drift mollify(const Drift& drift, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("mollify: delta must be a positive finite scale");
  }
  if (drift.series() != nullptr) return mollify_lacunary(drift, delta);
  return mollify_quadrature(drift, delta);
}

double default_delta(std::size_t n, double scale) {
  if (n == 0) throw std::invalid_argument("default_delta: n must be >= 1");
  return scale / std::sqrt(static_cast<double>(n));
}

OccupationDerivative qx_operator(const Drift& drift, const SamplePath& x_path, double delta) {
  if (x_path.dim != drift.dim()) {
    throw std::invalid_argument("qx_operator: path and drift dimensions differ");
  }
  if (x_path.steps != x_path.grid.fine_steps()) {
    throw std::invalid_argument("qx_operator: path must live on the fine grid");
  }
  Drift smooth_drift;
  if (delta > 0.0) {
    smooth_drift = mollify(drift, delta);
  } else if (delta == 0.0 && drift.regularity() == Regularity::smooth && drift.has_gradient()) {
    smooth_drift = drift;
  } else {
    throw std::invalid_argument("qx_operator: delta = 0 requires a smooth drift with gradient");
  }

  const std::size_t d = drift.dim();
  const std::size_t dd = d * d;
  OccupationDerivative out;
  out.delta = delta;
  out.source = drift.name();
  out.values.grid = x_path.grid;
  out.values.dim = d;
  out.values.provenance = MatrixProvenance::occupation;
  out.values.values.assign((x_path.steps + 1) * dd, 0.0);
  const double h = 1.0 / static_cast<double>(x_path.steps);
  std::vector<double> jac(dd);
  for (std::size_t j = 0; j < x_path.steps; ++j) {
    smooth_drift.jacobian(x_path.at(j), jac);
    const double* prev = out.values.values.data() + j * dd;
    double* next = out.values.values.data() + (j + 1) * dd;
    for (std::size_t e = 0; e < dd; ++e) {
      if (!std::isfinite(jac[e])) throw NumericalError("non-finite drift gradient", j);
      next[e] = prev[e] + jac[e] * h;
    }
  }
  return out;
}

HolderSeminormEstimate holder_seminorm(std::span<const double> values, std::size_t components,
                                       double gamma, double max_gap) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("holder_seminorm: gamma must lie in (0, 1]");
  }
  if (components == 0 || values.size() % components != 0) {
    throw std::invalid_argument("holder_seminorm: value count is not a multiple of components");
  }
  HolderSeminormEstimate est;
  est.exponent = gamma;
  const std::size_t nodes = values.size() / components;
  if (nodes < 2) {
    est.degenerate = true;
    return est;
  }
  const double dt = 1.0 / static_cast<double>(nodes - 1);
  for (std::size_t gap = 1; gap < nodes; gap *= 2) {
    const double tgap = static_cast<double>(gap) * dt;
    if (tgap > max_gap * (1.0 + 1e-12)) break;
    est.gaps.push_back(gap);
    const double denom = std::pow(tgap, gamma);
    for (std::size_t s = 0; s + gap < nodes; ++s) {
      double sq = 0.0;
      for (std::size_t c = 0; c < components; ++c) {
        const double diff = values[(s + gap) * components + c] - values[s * components + c];
        sq += diff * diff;
      }
      est.value = std::max(est.value, std::sqrt(sq) / denom);
    }
  }
  return est;
}

HolderSeminormEstimate holder_seminorm(const SamplePath& path, double gamma, double max_gap) {
  return holder_seminorm(path.values, path.dim, gamma, max_gap);
}

HolderSeminormEstimate holder_seminorm(const MatrixPath& path, double gamma, double max_gap) {
  return holder_seminorm(path.values, path.dim * path.dim, gamma, max_gap);
}

}  // namespace emclt
