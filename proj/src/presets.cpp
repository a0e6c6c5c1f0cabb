#include "emclt/presets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace emclt {

namespace {

double param(const PresetParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void reject_unknown(const PresetParams& p, std::initializer_list<const char*> known,
                    const std::string& preset) {
  for (const auto& [key, value] : p) {
    const bool ok = std::any_of(known.begin(), known.end(),
                                [&](const char* k) { return key == k; });
    if (!ok) throw std::invalid_argument("preset '" + preset + "' has no parameter '" + key + "'");
  }
}

constexpr const char* kDriftPresets[] = {"zero", "constant", "linear", "smooth-tanh",
                                         "holder-lacunary", "sobolev-bump"};
constexpr const char* kDiffusionPresets[] = {"identity", "constant", "sin-modulated"};

}  // namespace

Drift make_drift(const std::string& name, const PresetParams& params, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("make_drift: dimension must be >= 1");
  auto zero_jac = [](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(x.size() * x.size()), 0.0);
  };
  if (name == "zero") {
    reject_unknown(params, {}, name);
    return Drift::smooth(
        "zero", dim,
        [](std::span<const double> x, std::span<double> out) {
          std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(x.size()), 0.0);
        },
        zero_jac);
  }
  if (name == "constant") {
    reject_unknown(params, {"c"}, name);
    const double c = param(params, "c", 1.0);
    return Drift::smooth(
        "constant(c=" + std::to_string(c) + ")", dim,
        [c](std::span<const double> x, std::span<double> out) {
          for (std::size_t l = 0; l < x.size(); ++l) out[l] = c;
        },
        zero_jac);
  }
  if (name == "linear") {
    reject_unknown(params, {"a"}, name);
    const double a = param(params, "a", -1.0);
    return Drift::smooth(
        "linear(a=" + std::to_string(a) + ")", dim,
        [a](std::span<const double> x, std::span<double> out) {
          for (std::size_t l = 0; l < x.size(); ++l) out[l] = a * x[l];
        },
        [a](std::span<const double> x, std::span<double> out) {
          const std::size_t n = x.size();
          for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
          for (std::size_t l = 0; l < n; ++l) out[l * n + l] = a;
        });
  }
  if (name == "smooth-tanh") {
    reject_unknown(params, {}, name);
    // b^l(x) = 0.5 - 2 tanh(x^l)
    return Drift::smooth(
        "smooth-tanh", dim,
        [](std::span<const double> x, std::span<double> out) {
          for (std::size_t l = 0; l < x.size(); ++l) out[l] = 0.5 - 2.0 * std::tanh(x[l]);
        },
        [](std::span<const double> x, std::span<double> out) {
          const std::size_t n = x.size();
          for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
          for (std::size_t l = 0; l < n; ++l) {
            const double c = std::cosh(x[l]);
            out[l * n + l] = -2.0 / (c * c);
          }
        });
  }
  if (name == "holder-lacunary") {
    reject_unknown(params, {"alpha", "K"}, name);
    const double alpha = param(params, "alpha", 0.5);
    const double top = param(params, "K", 14.0);
    if (top < 0.0 || top > 40.0 || top != std::floor(top)) {
      throw std::invalid_argument("holder-lacunary: K must be an integer in [0, 40]");
    }
    std::ostringstream label;
    label << "holder-lacunary(alpha=" << alpha << ")";
    return Drift::lacunary(dim, LacunarySeries::standard(alpha, static_cast<std::size_t>(top)),
                           label.str());
  }
  if (name == "sobolev-bump") {
    reject_unknown(params, {"alpha", "m", "amplitude", "radius"}, name);
    const double alpha = param(params, "alpha", 0.5);
    const double m = param(params, "m", 2.0);
    const double amp = param(params, "amplitude", 1.5);
    const double radius = param(params, "radius", 1.0);
    if (!(radius > 0.0)) throw std::invalid_argument("sobolev-bump: radius must be > 0");
    // The square-root edge places the bump in W^s_m for s < 1/2 + 1/m.
    if (!(alpha < 0.5 + 1.0 / m)) {
      throw std::invalid_argument("sobolev-bump: requires alpha < 1/2 + 1/m");
    }
    std::ostringstream label;
    label << "sobolev-bump(alpha=" << alpha << ", m=" << m << ")";
    return Drift::sobolev(label.str(), dim, alpha, m, radius,
                          [amp, radius](std::span<const double> x, std::span<double> out) {
                            double r2 = 0.0;
                            for (double xi : x) r2 += xi * xi;
                            const double s = 1.0 - r2 / (radius * radius);
                            const double v = s > 0.0 ? amp * std::sqrt(s) : 0.0;
                            for (std::size_t l = 0; l < x.size(); ++l) out[l] = v;
                          });
  }
  throw std::invalid_argument("unknown drift preset '" + name + "'");
}

Diffusion make_diffusion(const std::string& name, const PresetParams& params, std::size_t dim,
                         double& lambda) {
  if (dim == 0) throw std::invalid_argument("make_diffusion: dimension must be >= 1");
  Diffusion sig;
  sig.dim = dim;
  auto zeros = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  if (name == "identity" || name == "constant") {
    reject_unknown(params, name == "identity" ? std::initializer_list<const char*>{}
                                              : std::initializer_list<const char*>{"s"},
                   name);
    const double s = name == "identity" ? 1.0 : param(params, "s", 1.0);
    if (!(s > 0.0)) throw std::invalid_argument("constant diffusion: s must be > 0");
    sig.name = name == "identity" ? "identity" : "constant(s=" + std::to_string(s) + ")";
    sig.value = [s](std::span<const double> x, std::span<double> out) {
      const std::size_t n = x.size();
      for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
      for (std::size_t l = 0; l < n; ++l) out[l * n + l] = s;
    };
    sig.grad = zeros;
    sig.hess = zeros;
    lambda = s;
    return sig;
  }
  if (name == "sin-modulated") {
    reject_unknown(params, {"amp"}, name);
    const double amp = param(params, "amp", 0.5);
    if (!(amp >= 0.0 && amp < 1.0)) {
      throw std::invalid_argument("sin-modulated: amp must lie in [0, 1)");
    }
    // sigma^{(l,l)}(x) = 1 + amp sin(x^l), off-diagonal zero.
    sig.name = "sin-modulated(amp=" + std::to_string(amp) + ")";
    sig.value = [amp](std::span<const double> x, std::span<double> out) {
      const std::size_t n = x.size();
      for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
      for (std::size_t l = 0; l < n; ++l) out[l * n + l] = 1.0 + amp * std::sin(x[l]);
    };
    sig.grad = [amp](std::span<const double> x, std::span<double> out) {
      const std::size_t n = x.size();
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n * n * n), 0.0);
      for (std::size_t l = 0; l < n; ++l) out[(l * n + l) * n + l] = amp * std::cos(x[l]);
    };
    sig.hess = [amp](std::span<const double> x, std::span<double> out) {
      const std::size_t n = x.size();
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n * n * n * n), 0.0);
      for (std::size_t l = 0; l < n; ++l) {
        out[((l * n + l) * n + l) * n + l] = -amp * std::sin(x[l]);
      }
    };
    lambda = 1.0 - amp;
    return sig;
  }
  throw std::invalid_argument("unknown diffusion preset '" + name + "'");
}

ModelSpec make_model(const ModelChoice& choice) {
  ModelSpec m;
  m.dim = choice.dim;
  m.x0 = choice.x0.empty() ? std::vector<double>(choice.dim, 0.0) : choice.x0;
  m.drift = make_drift(choice.drift, choice.drift_params, choice.dim);
  double lambda = 1.0;
  m.diffusion = make_diffusion(choice.diffusion, choice.diffusion_params, choice.dim, lambda);
  m.lambda = choice.lambda.value_or(lambda);
  validate(m);
  return m;
}

bool is_drift_preset(const std::string& name) {
  return std::find(std::begin(kDriftPresets), std::end(kDriftPresets), name) !=
         std::end(kDriftPresets);
}

bool is_diffusion_preset(const std::string& name) {
  return std::find(std::begin(kDiffusionPresets), std::end(kDiffusionPresets), name) !=
         std::end(kDiffusionPresets);
}

std::string list_presets() {
  std::ostringstream os;
  os << "drift presets (b^l applied per coordinate unless noted):\n"
     << "  zero                                  C^inf      b = 0\n"
     << "  constant(c=1)                         C^inf      b = c\n"
     << "  linear(a=-1)                          C^inf      b(x) = a x\n"
     << "  smooth-tanh                           C^inf      b(x) = 0.5 - 2 tanh(x)\n"
     << "  holder-lacunary(alpha=0.5)            C^{alpha+} sum_{k<=K} 2^{-alpha k}(1+k)^{-2}"
        " cos(2^k x + phi_k), K=14\n"
     << "  sobolev-bump(alpha=0.5, m=2)          W^alpha_m  amplitude*(1-|x|^2/radius^2)_+^{1/2},"
        " bounded, compact support in |x| <= radius (default 1)\n"
     << "diffusion presets (lambda = ellipticity constant):\n"
     << "  identity                              C^inf      sigma = I, lambda = 1\n"
     << "  constant(s=1)                         C^inf      sigma = s I, lambda = s\n"
     << "  sin-modulated(amp=0.5)                C^inf      sigma = diag(1 + amp sin(x^l)),"
        " lambda = 1 - amp\n";
  return os.str();
}

}  // namespace emclt
