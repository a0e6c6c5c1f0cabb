#include "emclt/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace emclt {

std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::smooth: return "C^inf";
    case Regularity::holder: return "C^{alpha+}";
    case Regularity::sobolev: return "W^alpha_m";
  }
  return "unknown";
}

LacunarySeries LacunarySeries::standard(double alpha, std::size_t top_index) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("LacunarySeries: alpha must lie in (0, 1)");
  }
  constexpr double kGoldenAngle = 2.399963229728653;  // pi (3 - sqrt 5)
  LacunarySeries s;
  s.alpha = alpha;
  for (std::size_t k = 0; k <= top_index; ++k) {
    const double kk = static_cast<double>(k);
    s.coeffs.push_back(std::pow(2.0, -alpha * kk) / ((1.0 + kk) * (1.0 + kk)));
    s.phases.push_back(std::fmod(kk * kGoldenAngle, 2.0 * std::numbers::pi));
  }
  s.prepare();
  return s;
}

void LacunarySeries::prepare() {
  rotations.clear();
  for (double p : phases) rotations.emplace_back(std::cos(p), std::sin(p));
}

// e^{i 2^k x} by repeated squaring; the phase error after K squarings is
// about 2^K ulp, far below the coefficient scale for K <= 20.
void LacunarySeries::value_and_derivative(double x, double& value, double& derivative) const {
  if (rotations.size() != coeffs.size()) {
    throw std::logic_error("LacunarySeries: call prepare() after editing phases");
  }
  double zr = std::cos(x);
  double zi = std::sin(x);
  double v = 0.0;
  double dv = 0.0;
  double freq = 1.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double cr = rotations[k].real();
    const double ci = rotations[k].imag();
    v += coeffs[k] * (zr * cr - zi * ci);
    dv -= coeffs[k] * freq * (zr * ci + zi * cr);
    const double sr = zr * zr - zi * zi;
    zi = 2.0 * zr * zi;
    zr = sr;
    freq *= 2.0;
  }
  value = v;
  derivative = dv;
}

double LacunarySeries::value(double x) const {
  double v = 0.0, dv = 0.0;
  value_and_derivative(x, v, dv);
  return v;
}

double LacunarySeries::value_direct(double x) const {
  double v = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    v += coeffs[k] * std::cos(std::ldexp(x, static_cast<int>(k)) + phases[k]);
  }
  return v;
}

double LacunarySeries::derivative_direct(double x) const {
  double dv = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    dv -= coeffs[k] * std::ldexp(1.0, static_cast<int>(k)) *
          std::sin(std::ldexp(x, static_cast<int>(k)) + phases[k]);
  }
  return dv;
}

double LacunarySeries::envelope_constant() const {
  double c = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double rho = 1.0 / ((1.0 + kk) * (1.0 + kk));
    c = std::max(c, std::abs(coeffs[k]) * std::pow(2.0, alpha * kk) / rho);
  }
  return c;
}

Drift Drift::smooth(std::string name, std::size_t dim, Field value, Field jacobian) {
  if (!value || !jacobian) throw std::invalid_argument("Drift::smooth: missing callable");
  Drift d;
  d.name_ = std::move(name);
  d.dim_ = dim;
  d.regularity_ = Regularity::smooth;
  d.alpha_ = std::numeric_limits<double>::infinity();
  d.value_ = std::move(value);
  d.jacobian_ = std::move(jacobian);
  return d;
}

Drift Drift::lacunary(std::size_t dim, LacunarySeries series, std::string name,
                      Regularity tag) {
  Drift d;
  d.name_ = name.empty() ? "holder-lacunary(alpha=" + std::to_string(series.alpha) + ")"
                         : std::move(name);
  d.dim_ = dim;
  d.regularity_ = tag;
  d.alpha_ = series.alpha;
  d.series_ = series;
  // Captured by value so copies of the drift stay self-contained.
  d.value_ = [s = series](std::span<const double> x, std::span<double> out) {
    for (std::size_t l = 0; l < x.size(); ++l) out[l] = s.value(x[l]);
  };
  d.jacobian_ = [s = std::move(series)](std::span<const double> x, std::span<double> out) {
    const std::size_t n = x.size();
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n * n), 0.0);
    for (std::size_t l = 0; l < n; ++l) {
      double v = 0.0, dv = 0.0;
      s.value_and_derivative(x[l], v, dv);
      out[l * n + l] = dv;
    }
  };
  return d;
}

Drift Drift::sobolev(std::string name, std::size_t dim, double alpha, double m,
                     double support_radius, Field value) {
  if (!value) throw std::invalid_argument("Drift::sobolev: missing callable");
  if (!(alpha > 0.0) || m < 1.0) {
    throw std::invalid_argument("Drift::sobolev: need alpha > 0 and m >= 1");
  }
  Drift d;
  d.name_ = std::move(name);
  d.dim_ = dim;
  d.regularity_ = Regularity::sobolev;
  d.alpha_ = alpha;
  d.m_ = m;
  d.support_radius_ = support_radius;
  d.value_ = std::move(value);
  return d;
}

void Drift::jacobian(std::span<const double> x, std::span<double> out) const {
  if (!jacobian_) {
    throw std::logic_error("Drift '" + name_ + "' has no gradient; mollify it first");
  }
  jacobian_(x, out);
}

AssumptionReport check_assumptions(const ModelSpec& model) {
  const std::size_t d = model.dim;
  AssumptionReport rep;
  rep.min_ellipticity_ratio = std::numeric_limits<double>::infinity();
  const std::size_t per_axis = d == 1 ? 33 : (d == 2 ? 17 : (d == 3 ? 9 : 3));
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= per_axis;

  std::vector<double> x(d), sig(d * d), grad(d * d * d), hess(d * d * d * d);
  Eigen::MatrixXd a(d, d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = -4.0 + 8.0 * static_cast<double>(rem % per_axis) / static_cast<double>(per_axis - 1);
      rem /= per_axis;
    }
    model.diffusion.value(x, sig);
    model.diffusion.grad(x, grad);
    model.diffusion.hess(x, hess);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += sig[i * d + k] * sig[j * d + k];
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    rep.min_ellipticity_ratio =
        std::min(rep.min_ellipticity_ratio, min_eig / (model.lambda * model.lambda));
    for (double v : sig) rep.max_sigma = std::max(rep.max_sigma, std::abs(v));
    for (double v : grad) rep.max_grad_sigma = std::max(rep.max_grad_sigma, std::abs(v));
    for (double v : hess) rep.max_hess_sigma = std::max(rep.max_hess_sigma, std::abs(v));
  }
  if (const auto* s = model.drift.series()) rep.lacunary_envelope = s->envelope_constant();
  return rep;
}

void validate(const ModelSpec& model) {
  if (model.dim == 0) throw std::invalid_argument("model: dimension must be >= 1");
  if (model.x0.size() != model.dim) throw std::invalid_argument("model: x0 has wrong dimension");
  if (model.drift.dim() != model.dim || model.diffusion.dim != model.dim) {
    throw std::invalid_argument("model: drift/diffusion dimension mismatch");
  }
  if (!(model.lambda > 0.0)) throw std::invalid_argument("model: lambda must be > 0");
  if (!model.diffusion.value || !model.diffusion.grad || !model.diffusion.hess) {
    throw std::invalid_argument("model: diffusion needs value, grad and hess callables");
  }
  const auto rep = check_assumptions(model);
  if (!rep.ok()) {
    throw std::invalid_argument("model: ellipticity spot-check failed (min ratio " +
                                std::to_string(rep.min_ellipticity_ratio) + ")");
  }
  if (!std::isfinite(rep.max_sigma) || !std::isfinite(rep.max_grad_sigma) ||
      !std::isfinite(rep.max_hess_sigma)) {
    throw std::invalid_argument("model: sigma or its derivatives unbounded on the lattice");
  }
}

}  // namespace emclt
