#include "emclt/scheme.hpp"

#include <cmath>

namespace emclt {

namespace {

struct Workspace {
  explicit Workspace(std::size_t d) : drift(d), sigma(d * d) {}
  std::vector<double> drift;
  std::vector<double> sigma;
};

void evaluate_coefficients(const ModelSpec& model, std::span<const double> x, Workspace& ws,
                           std::size_t step) {
  model.drift.value(x, ws.drift);
  model.diffusion.value(x, ws.sigma);
  for (double v : ws.drift) {
    if (!std::isfinite(v)) throw NumericalError("non-finite drift evaluation", step);
  }
  for (double v : ws.sigma) {
    if (!std::isfinite(v)) throw NumericalError("non-finite diffusion evaluation", step);
  }
}

// out = x + drift * dt + sigma * dB; shared by the coarse and the fine-node
// Euler loops so that both round identically.
void euler_update(std::span<const double> x, const Workspace& ws, double dt,
                  std::span<const double> db, std::span<double> out) {
  const std::size_t d = x.size();
  for (std::size_t l = 0; l < d; ++l) {
    double noise = 0.0;
    for (std::size_t i = 0; i < d; ++i) noise += ws.sigma[l * d + i] * db[i];
    out[l] = x[l] + ws.drift[l] * dt + noise;
  }
}

void check_model_path(const ModelSpec& model, const BrownianPath& path) {
  if (path.dim() != model.dim) {
    throw std::invalid_argument("Brownian path dimension does not match the model");
  }
}

}  // namespace

SamplePath euler_maruyama(const ModelSpec& model, const BrownianPath& path, std::size_t k) {
  check_model_path(model, path);
  const std::size_t total = path.steps();
  if (k == 0 || total % k != 0) {
    throw std::invalid_argument("euler_maruyama: level " + std::to_string(k) +
                                " does not divide the fine step count " + std::to_string(total));
  }
  const BrownianPath coarse = total == k ? path : coarsen(path, total / k);
  const std::size_t d = model.dim;
  SamplePath out;
  out.grid = path.grid();
  out.level = k == total ? GridLevel::fine : GridLevel::coarse;
  out.dim = d;
  out.steps = k;
  out.values.assign((k + 1) * d, 0.0);
  std::copy(model.x0.begin(), model.x0.end(), out.values.begin());

  Workspace ws(d);
  const double dt = 1.0 / static_cast<double>(k);
  for (std::size_t j = 0; j < k; ++j) {
    evaluate_coefficients(model, out.at(j), ws, j);
    euler_update(out.at(j), ws, dt, coarse.increment(j), out.at(j + 1));
    for (double v : out.at(j + 1)) {
      if (!std::isfinite(v)) throw NumericalError("non-finite Euler state", j + 1);
    }
  }
  return out;
}

SamplePath reference_solution(const ModelSpec& model, const BrownianPath& path) {
  return euler_maruyama(model, path, path.steps());
}

SamplePath euler_maruyama_fine(const ModelSpec& model, const BrownianPath& path, std::size_t n) {
  check_model_path(model, path);
  const std::size_t total = path.steps();
  if (n == 0 || total % n != 0) {
    throw std::invalid_argument("euler_maruyama_fine: n does not divide the fine step count");
  }
  const std::size_t per = total / n;
  const std::size_t d = model.dim;
  SamplePath out;
  out.grid = path.grid();
  out.level = GridLevel::fine;
  out.dim = d;
  out.steps = total;
  out.values.assign((total + 1) * d, 0.0);
  std::copy(model.x0.begin(), model.x0.end(), out.values.begin());

  Workspace ws(d);
  std::vector<double> partial(d);
  std::vector<double> anchor(d);
  const double denom = static_cast<double>(total);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t base = c * per;
    std::copy(out.at(base).begin(), out.at(base).end(), anchor.begin());
    evaluate_coefficients(model, anchor, ws, c);
    std::fill(partial.begin(), partial.end(), 0.0);
    for (std::size_t r = 1; r <= per; ++r) {
      const auto db = path.increment(base + r - 1);
      for (std::size_t i = 0; i < d; ++i) partial[i] += db[i];
      euler_update(anchor, ws, static_cast<double>(r) / denom, partial, out.at(base + r));
    }
    for (double v : out.at(base + per)) {
      if (!std::isfinite(v)) throw NumericalError("non-finite Euler state", c + 1);
    }
  }
  return out;
}

SamplePath fluctuation(const SamplePath& ref, const SamplePath& xn, std::size_t n) {
  if (ref.steps != xn.steps || ref.dim != xn.dim || ref.values.size() != xn.values.size()) {
    throw std::invalid_argument("fluctuation: grid mismatch between reference and scheme");
  }
  SamplePath v = ref;
  const double scale = std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    v.values[i] = scale * (ref.values[i] - xn.values[i]);
  }
  return v;
}

MatrixPath area_process(const BrownianPath& path, std::size_t n) {
  const std::size_t total = path.steps();
  if (n == 0 || total % n != 0) {
    throw std::invalid_argument("area_process: n does not divide the fine step count");
  }
  const std::size_t per = total / n;
  const std::size_t d = path.dim();
  const std::size_t dd = d * d;
  MatrixPath w;
  w.grid = path.grid();
  w.dim = d;
  w.provenance = MatrixProvenance::area_process;
  w.degenerate = per == 1;
  w.values.assign((total + 1) * dd, 0.0);
  const double scale = std::sqrt(2.0 * static_cast<double>(n));
  std::vector<double> offset(d, 0.0);  // B_{r_j} - B_{kappa_n(r_j)}
  for (std::size_t j = 0; j < total; ++j) {
    if (j % per == 0) std::fill(offset.begin(), offset.end(), 0.0);
    const auto db = path.increment(j);
    const double* prev = w.values.data() + j * dd;
    double* next = w.values.data() + (j + 1) * dd;
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t i = 0; i < d; ++i) {
        next[k * d + i] = prev[k * d + i] + scale * offset[k] * db[i];
      }
    }
    for (std::size_t k = 0; k < d; ++k) offset[k] += db[k];
  }
  return w;
}

MatrixPath brownian_matrix_path(const BrownianPath& increments, std::size_t dim) {
  if (increments.dim() != dim * dim) {
    throw std::invalid_argument("brownian_matrix_path: expected d^2-dimensional increments");
  }
  MatrixPath w;
  w.grid = increments.grid();
  w.dim = dim;
  w.provenance = MatrixProvenance::independent_brownian;
  w.values = increments.values();
  return w;
}

FluctuationBundle make_bundle(const ModelSpec& model, const BrownianPath& path) {
  FluctuationBundle b;
  b.n = path.grid().n();
  b.x_ref = reference_solution(model, path);
  b.x_n = euler_maruyama_fine(model, path, b.n);
  b.v_n = fluctuation(b.x_ref, b.x_n, b.n);
  b.w_n = area_process(path, b.n);
  return b;
}

}  // namespace emclt
