#include "emclt/limit_holder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace emclt {

YoungPair::YoungPair(SamplePath integrand, MatrixPath integrator, double beta, double theta,
                     bool force)
    : z_(std::move(integrand)), l_(std::move(integrator)), beta_(beta), theta_(theta) {
  if (z_.dim != l_.dim) throw std::invalid_argument("YoungPair: dimension mismatch");
  if (z_.nodes() != l_.values.size() / (l_.dim * l_.dim)) {
    throw std::invalid_argument("YoungPair: integrand and integrator use different grids");
  }
  if (!young_condition() && !force) {
    throw std::invalid_argument("YoungPair: beta + theta must exceed 1 (pass force to override)");
  }
}

namespace {

std::vector<double> riemann_stieltjes(const YoungPair& pair, std::size_t up_to,
                                      std::size_t stride) {
  const SamplePath& z = pair.integrand();
  const MatrixPath& l = pair.integrator();
  const std::size_t d = z.dim;
  std::vector<double> acc(d, 0.0);
  for (std::size_t j = 0; j + stride <= up_to; j += stride) {
    const auto zj = z.at(j);
    const auto l0 = l.at(j);
    const auto l1 = l.at(j + stride);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t k = 0; k < d; ++k) acc[r] += (l1[r * d + k] - l0[r * d + k]) * zj[k];
    }
  }
  return acc;
}

}  // namespace

std::vector<double> young_integral(const YoungPair& pair, std::size_t up_to) {
  if (up_to >= pair.integrand().nodes()) {
    throw std::out_of_range("young_integral: node index beyond the path");
  }
  return riemann_stieltjes(pair, up_to, 1);
}

std::vector<double> young_integral_subsampled(const YoungPair& pair, std::size_t stride) {
  const std::size_t last = pair.integrand().nodes() - 1;
  if (stride == 0 || last % stride != 0) {
    throw std::invalid_argument("young_integral_subsampled: stride must divide the step count");
  }
  return riemann_stieltjes(pair, last, stride);
}

YoungPair synthetic_young_pair(double beta, double theta, std::size_t log2_steps,
                               std::size_t terms, std::uint64_t seed, std::size_t dim) {
  if (log2_steps > 24) throw std::invalid_argument("synthetic_young_pair: grid too fine");
  const std::size_t steps = std::size_t{1} << log2_steps;
  const TimeGrid grid(steps, 1);
  auto eng = make_engine({seed, 0, 0x7a11});
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phi(terms), psi(terms), freq(terms), za(terms), la(terms);
  for (std::size_t k = 0; k < terms; ++k) {
    phi[k] = phase(eng);
    psi[k] = phase(eng);
    freq[k] = std::pow(3.0, static_cast<double>(k));
    za[k] = std::pow(3.0, -beta * static_cast<double>(k));
    la[k] = std::pow(3.0, -theta * static_cast<double>(k));
  }
  SamplePath z;
  z.grid = grid;
  z.dim = dim;
  z.steps = steps;
  z.values.assign((steps + 1) * dim, 0.0);
  MatrixPath l;
  l.grid = grid;
  l.dim = dim;
  l.provenance = MatrixProvenance::synthetic;
  l.values.assign((steps + 1) * dim * dim, 0.0);
  for (std::size_t j = 0; j <= steps; ++j) {
    const double t = grid.fine_time(j);
    double zv = 0.0, lv = 0.0;
    for (std::size_t k = 0; k < terms; ++k) {
      // Reduce the phase modulo one period before scaling to keep accuracy.
      const double arg = 2.0 * std::numbers::pi * std::fmod(freq[k] * t, 1.0);
      zv += za[k] * std::cos(arg + phi[k]);
      lv += la[k] * std::sin(arg + psi[k]);
    }
    for (std::size_t c = 0; c < dim; ++c) {
      z.values[j * dim + c] = zv;
      l.values[j * dim * dim + c * dim + c] = lv;
    }
  }
  return YoungPair(std::move(z), std::move(l), beta, theta);
}

RefinementCascade refinement_cascade(std::span<const YoungPair> pairs, std::size_t min_level) {
  if (pairs.empty()) throw std::invalid_argument("refinement_cascade: no pairs");
  const std::size_t steps = pairs[0].integrand().steps;
  std::size_t top = 0;
  while ((std::size_t{1} << top) < steps) ++top;
  if ((std::size_t{1} << top) != steps) {
    throw std::invalid_argument("refinement_cascade: step count must be a power of two");
  }
  if (top < min_level + 3) throw std::invalid_argument("refinement_cascade: too few levels");
  RefinementCascade out;
  std::vector<double> meshes;
  for (std::size_t k = min_level; k < top; ++k) {
    double acc = 0.0;
    for (const auto& pair : pairs) {
      if (pair.integrand().steps != steps) {
        throw std::invalid_argument("refinement_cascade: pairs live on different grids");
      }
      const auto coarse = young_integral_subsampled(pair, std::size_t{1} << (top - k));
      const auto fine = young_integral_subsampled(pair, std::size_t{1} << (top - k - 1));
      double sq = 0.0;
      for (std::size_t c = 0; c < coarse.size(); ++c) sq += (fine[c] - coarse[c]) * (fine[c] - coarse[c]);
      acc += std::sqrt(sq);
    }
    out.levels.push_back(k);
    out.gaps.push_back(acc / static_cast<double>(pairs.size()));
    meshes.push_back(std::ldexp(1.0, static_cast<int>(k)));
  }
  out.fit = rate_fit(meshes, out.gaps);
  out.exponent = -out.fit.slope;
  return out;
}

double claimed_beta(double alpha) { return std::min(0.45, (1.0 + alpha) / 2.0 - 0.05); }

LimitSolutionHolder solve_limit_holder(const ModelSpec& model, const SamplePath& x_ref,
                                       const OccupationDerivative& l, const BrownianPath& b,
                                       const MatrixPath& w, const LimitOptions& options) {
  const std::size_t d = model.dim;
  const std::size_t steps = x_ref.steps;
  if (x_ref.dim != d || b.dim() != d || l.values.dim != d || w.dim != d) {
    throw std::invalid_argument("solve_limit_holder: driver dimension mismatch");
  }
  if (b.steps() != steps || l.values.values.size() != (steps + 1) * d * d ||
      w.values.size() != (steps + 1) * d * d) {
    throw std::invalid_argument("solve_limit_holder: drivers live on different grids");
  }
  if (options.require_independent_w && w.provenance != MatrixProvenance::independent_brownian) {
    throw std::invalid_argument("solve_limit_holder: W must be an independent Brownian motion");
  }

  LimitSolutionHolder out;
  out.steps = steps;
  out.order = options.order;
  out.beta = claimed_beta(model.drift.alpha() > 1.0 ? 1.0 : model.drift.alpha());
  out.delta = l.delta;
  out.v.grid = x_ref.grid;
  out.v.level = GridLevel::fine;
  out.v.dim = d;
  out.v.steps = steps;
  out.v.values.assign((steps + 1) * d, 0.0);

  const std::size_t dd = d * d;
  std::vector<double> sig(dd), grad(dd * d), young(d), ito(d), forcing(d);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const bool rev = options.order == SummationOrder::reverse;
  auto idx = [rev](std::size_t i, std::size_t count) { return rev ? count - 1 - i : i; };

  for (std::size_t j = 0; j < steps; ++j) {
    const auto x = x_ref.at(j);
    const auto v = out.v.at(j);
    const auto l0 = l.values.at(j);
    const auto l1 = l.values.at(j + 1);
    const auto w0 = w.at(j);
    const auto w1 = w.at(j + 1);
    const auto db = b.increment(j);
    model.diffusion.value(x, sig);
    model.diffusion.grad(x, grad);

    for (std::size_t row = 0; row < d; ++row) {
      double y = 0.0, it = 0.0, fo = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const std::size_t k = idx(a, d);
        y += v[k] * (l1[row * d + k] - l0[row * d + k]);
        for (std::size_t c = 0; c < d; ++c) {
          const std::size_t i = idx(c, d);
          const double dsig = grad[(row * d + i) * d + k];  // d_k sigma^{(row,i)}
          it += dsig * v[k] * db[i];
          for (std::size_t e = 0; e < d; ++e) {
            const std::size_t m = idx(e, d);
            fo += sig[k * d + m] * dsig * (w1[m * d + i] - w0[m * d + i]);
          }
        }
      }
      young[row] = options.young_term ? y : 0.0;
      ito[row] = options.ito_term ? it : 0.0;
      forcing[row] = options.forcing_term ? options.forcing_scale * inv_sqrt2 * fo : 0.0;
    }
    auto next = out.v.at(j + 1);
    for (std::size_t row = 0; row < d; ++row) {
      next[row] = rev ? v[row] + (forcing[row] + ito[row] + young[row])
                      : v[row] + (young[row] + ito[row] + forcing[row]);
      if (!std::isfinite(next[row])) throw NumericalError("non-finite limit state", j + 1);
    }
  }
  return out;
}

double voc_oracle_1d(const ModelSpec& model, const SamplePath& x_ref, const BrownianPath& b,
                     const MatrixPath& w) {
  if (model.dim != 1) throw std::invalid_argument("voc_oracle_1d: requires d = 1");
  if (!model.drift.has_gradient()) {
    throw std::invalid_argument("voc_oracle_1d: requires a differentiable drift");
  }
  const std::size_t steps = x_ref.steps;
  if (b.steps() != steps || w.values.size() != steps + 1) {
    throw std::invalid_argument("voc_oracle_1d: drivers live on different grids");
  }
  const double h = 1.0 / static_cast<double>(steps);
  double log_phi = 0.0;
  double integral = 0.0;
  double jac = 0.0, sig = 0.0, dsig = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    const auto x = x_ref.at(j);
    model.drift.jacobian(x, std::span<double>(&jac, 1));
    model.diffusion.value(x, std::span<double>(&sig, 1));
    model.diffusion.grad(x, std::span<double>(&dsig, 1));
    const double forcing = sig * dsig / std::numbers::sqrt2;
    integral += std::exp(-log_phi) * forcing * (w.values[j + 1] - w.values[j]);
    log_phi += jac * h + dsig * b.increment(j)[0] - 0.5 * dsig * dsig * h;
  }
  return std::exp(log_phi) * integral;
}

}  // namespace emclt
