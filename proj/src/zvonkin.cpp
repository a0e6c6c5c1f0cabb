#include "emclt/zvonkin.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace emclt {

double PDESolution::interpolate(const std::vector<double>& field, double t, double xq) const {
  const double tau = std::clamp(t, 0.0, 1.0) / dt;
  const std::size_t k = std::min(static_cast<std::size_t>(tau), nt - 1);
  const double st = tau - static_cast<double>(k);
  const double xi = (std::clamp(xq, -half_width, half_width) + half_width) / dx;
  const std::size_t i = std::min(static_cast<std::size_t>(xi), nx - 2);
  const double sx = xi - static_cast<double>(i);
  const double* lo = field.data() + k * nx + i;
  const double* hi = lo + nx;
  const double a = lo[0] + sx * (lo[1] - lo[0]);
  const double c = hi[0] + sx * (hi[1] - hi[0]);
  return a + st * (c - a);
}

namespace {

// Solves the tridiagonal system (lower, diag, upper) y = rhs in place.
void thomas(const std::vector<double>& lower, const std::vector<double>& diag,
            const std::vector<double>& upper, std::vector<double>& rhs,
            std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  scratch.resize(n);
  double beta = diag[0];
  rhs[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    scratch[i] = upper[i - 1] / beta;
    beta = diag[i] - lower[i] * scratch[i];
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

}  // namespace

PDESolution solve_corrector_pde(const ModelSpec& model, double theta, double half_width,
                                PdeResolution res) {
  if (model.dim != 1) throw std::invalid_argument("solve_corrector_pde: only d = 1 is supported");
  if (!(theta > 0.0)) throw std::invalid_argument("solve_corrector_pde: theta must be positive");
  if (!(half_width > 0.0)) throw std::invalid_argument("solve_corrector_pde: R must be positive");
  if (res.nx < 3 || res.nt < 2) {
    throw std::invalid_argument("solve_corrector_pde: need nx >= 3 and nt >= 2");
  }
  PDESolution sol;
  sol.theta = theta;
  sol.half_width = half_width;
  sol.nx = res.nx;
  sol.nt = res.nt;
  sol.dx = 2.0 * half_width / static_cast<double>(res.nx - 1);
  sol.dt = 1.0 / static_cast<double>(res.nt);
  const std::size_t nx = res.nx, nt = res.nt;
  const double dx = sol.dx, dt = sol.dt;

  // Spatial operator A u_i = l_i u_{i-1} + c_i u_i + r_i u_{i+1}.
  std::vector<double> src(nx), l(nx), c(nx), r(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double xi = sol.x(i);
    double bv = 0.0, sv = 0.0;
    model.drift.value(std::span<const double>(&xi, 1), std::span<double>(&bv, 1));
    model.diffusion.value(std::span<const double>(&xi, 1), std::span<double>(&sv, 1));
    const double a = sv * sv;
    src[i] = bv;
    l[i] = 0.5 * a / (dx * dx) - bv / (2.0 * dx);
    r[i] = 0.5 * a / (dx * dx) + bv / (2.0 * dx);
    c[i] = -a / (dx * dx) - theta;
  }
  // Neumann ghosts u_{-1} = u_1, u_{nx} = u_{nx-2}.
  r[0] += l[0];
  l[0] = 0.0;
  l[nx - 1] += r[nx - 1];
  r[nx - 1] = 0.0;

  sol.u.assign((nt + 1) * nx, 0.0);  // level nt (t = 1) stays exactly zero
  std::vector<double> lower(nx), diag(nx), upper(nx), rhs(nx), scratch;
  auto assemble = [&](double alpha, double beta) {
    for (std::size_t i = 0; i < nx; ++i) {
      lower[i] = -beta * l[i];
      diag[i] = alpha - beta * c[i];
      upper[i] = -beta * r[i];
      if (std::abs(diag[i]) <= std::abs(lower[i]) + std::abs(upper[i])) {
        throw NumericalError("corrector solve is not diagonally dominant (refine dx)", i);
      }
    }
  };

  for (std::size_t m = 1; m <= nt; ++m) {
    const std::size_t k = nt - m;  // level being computed
    const double* u1 = sol.u.data() + (k + 1) * nx;
    if (m == 1) {
      assemble(1.0, dt);
      for (std::size_t i = 0; i < nx; ++i) rhs[i] = u1[i] + dt * src[i];
    } else {
      if (m == 2) assemble(3.0, 2.0 * dt);
      const double* u2 = sol.u.data() + (k + 2) * nx;
      for (std::size_t i = 0; i < nx; ++i) rhs[i] = 4.0 * u1[i] - u2[i] + 2.0 * dt * src[i];
    }
    const std::vector<double> b0 = rhs;
    thomas(lower, diag, upper, rhs, scratch);
    double res_max = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      double y = diag[i] * rhs[i];
      if (i > 0) y += lower[i] * rhs[i - 1];
      if (i + 1 < nx) y += upper[i] * rhs[i + 1];
      res_max = std::max(res_max, std::abs(y - b0[i]));
      scale = std::max(scale, std::abs(b0[i]));
    }
    const double rel = scale > 0.0 ? res_max / scale : res_max;
    sol.max_residual = std::max(sol.max_residual, rel);
    if (!(rel < 1e-6)) throw NumericalError("corrector residual above 1e-6", k);
    std::copy(rhs.begin(), rhs.end(), sol.u.begin() + static_cast<std::ptrdiff_t>(k * nx));
  }

  sol.grad_u.assign(sol.u.size(), 0.0);
  sol.hess_u.assign(sol.u.size(), 0.0);
  for (std::size_t k = 0; k <= nt; ++k) {
    const double* uk = sol.u.data() + k * nx;
    double* gk = sol.grad_u.data() + k * nx;
    double* hk = sol.hess_u.data() + k * nx;
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      gk[i] = (uk[i + 1] - uk[i - 1]) / (2.0 * dx);
      hk[i] = (uk[i + 1] - 2.0 * uk[i] + uk[i - 1]) / (dx * dx);
      sol.sup_grad = std::max(sol.sup_grad, std::abs(gk[i]));
    }
    hk[0] = 2.0 * (uk[1] - uk[0]) / (dx * dx);
    hk[nx - 1] = 2.0 * (uk[nx - 2] - uk[nx - 1]) / (dx * dx);
  }
  return sol;
}

GradientBoundTable check_gradient_bound(std::span<const PDESolution> solutions) {
  GradientBoundTable table;
  for (const auto& s : solutions) table.rows.push_back({s.theta, s.sup_grad});
  std::sort(table.rows.begin(), table.rows.end(),
            [](const auto& a, const auto& b) { return a.theta < b.theta; });
  const bool positive = std::all_of(table.rows.begin(), table.rows.end(),
                                    [](const auto& row) { return row.sup_grad > 0.0; });
  if (positive && table.rows.size() >= 3) {
    std::vector<double> thetas, grads;
    for (const auto& row : table.rows) {
      thetas.push_back(row.theta);
      grads.push_back(row.sup_grad);
    }
    table.fit = rate_fit(thetas, grads);
    table.fitted = true;
  }
  return table;
}

LimitSolutionSobolev solve_limit_sobolev(const ModelSpec& model, const PDESolution& u,
                                         const SamplePath& x_ref, const BrownianPath& b,
                                         const MatrixPath& w) {
  if (model.dim != 1 || x_ref.dim != 1 || b.dim() != 1 || w.dim != 1) {
    throw std::invalid_argument("solve_limit_sobolev: only d = 1 is supported");
  }
  if (!u.usable()) {
    throw std::invalid_argument("solve_limit_sobolev: corrector has sup|u'| >= 1; raise theta");
  }
  const std::size_t steps = x_ref.steps;
  if (b.steps() != steps || w.values.size() != steps + 1) {
    throw std::invalid_argument("solve_limit_sobolev: drivers live on different grids");
  }
  LimitSolutionSobolev out;
  out.u_ref = &u;
  out.z.grid = x_ref.grid;
  out.z.dim = 1;
  out.z.steps = steps;
  out.z.values.assign(steps + 1, 0.0);
  out.v = out.z;

  const double h = 1.0 / static_cast<double>(steps);
  const double limit = 0.5 * u.half_width;
  double sig = 0.0, dsig = 0.0;
  for (std::size_t j = 0; j <= steps; ++j) {
    const double t = x_ref.time(j);
    const double x = x_ref.values[j];
    if (std::abs(x) > limit) ++out.exits;
    const double ux = u.interpolate(u.grad_u, t, x);
    const double c = 1.0 + ux;
    if (std::abs(c) < 1e-6) throw NumericalError("I + grad u is near-singular", j);
    const double cinv = 1.0 / c;
    out.max_roundtrip_error = std::max(out.max_roundtrip_error, std::abs(c * cinv - 1.0));
    const double z = out.z.values[j];
    out.v.values[j] = cinv * z;
    if (j == steps) break;

    const double uxx = u.interpolate(u.hess_u, t, x);
    model.diffusion.value(x_ref.at(j), std::span<double>(&sig, 1));
    model.diffusion.grad(x_ref.at(j), std::span<double>(&dsig, 1));
    const double drift = u.theta * ux * cinv * z * h;
    const double noise = (uxx * sig + c * dsig) * cinv * z * b.increment(j)[0];
    const double forcing = c * sig * dsig / std::numbers::sqrt2 * (w.values[j + 1] - w.values[j]);
    const double next = z + (drift + noise + forcing);
    if (!std::isfinite(next)) throw NumericalError("non-finite transformed state", j + 1);
    out.z.values[j + 1] = next;
  }
  return out;
}

void dump_field(const PDESolution& u, const std::filesystem::path& stem) {
  std::filesystem::path bin = stem;
  bin += ".bin";
  std::filesystem::path meta = stem;
  meta += ".json";
  {
    std::ofstream f(bin, std::ios::binary);
    if (!f) throw std::runtime_error("dump_field: cannot open " + bin.string());
    f.write(reinterpret_cast<const char*>(u.u.data()),
            static_cast<std::streamsize>(u.u.size() * sizeof(double)));
    f.write(reinterpret_cast<const char*>(u.grad_u.data()),
            static_cast<std::streamsize>(u.grad_u.size() * sizeof(double)));
  }
  nlohmann::json j;
  j["fields"] = {"u", "grad_u"};
  j["dtype"] = "float64";
  j["layout"] = "field-major, then time level, then x";
  j["shape"] = {u.nt + 1, u.nx};
  j["t0"] = 0.0;
  j["dt"] = u.dt;
  j["x0"] = -u.half_width;
  j["dx"] = u.dx;
  j["theta"] = u.theta;
  j["half_width"] = u.half_width;
  j["sup_grad"] = u.sup_grad;
  std::ofstream f(meta);
  if (!f) throw std::runtime_error("dump_field: cannot open " + meta.string());
  f << j.dump(2) << '\n';
}

}  // namespace emclt
