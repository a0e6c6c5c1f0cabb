#include "emclt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "emclt/averaging.hpp"
#include "emclt/limit_holder.hpp"
#include "emclt/montecarlo.hpp"
#include "emclt/paths.hpp"
#include "emclt/scheme.hpp"

namespace emclt {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t k) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i][k];
  return out;
}

void require_ns(const std::vector<std::size_t>& ns, std::size_t minimum, const char* who) {
  if (ns.size() < minimum) {
    throw std::invalid_argument(std::string(who) + ": at least " + std::to_string(minimum) +
                                " values of n are required");
  }
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw std::invalid_argument(std::string(who) + ": ns must be increasing");
  }
}

std::optional<RateFit> try_fit(const std::vector<double>& ns, const std::vector<Estimate>& est) {
  std::vector<double> v, se;
  for (const auto& e : est) {
    if (!(e.value > 0.0)) return std::nullopt;
    v.push_back(e.value);
    se.push_back(e.se);
  }
  return rate_fit(ns, v, se);
}

}  // namespace

// ---------------------------------------------------------------- strong rate

StrongRateReport strong_rate_experiment(const StrongRateConfig& cfg, const RunContext& ctx) {
  require_ns(cfg.ns, 1, "strong_rate_experiment");
  validate(cfg.model);
  struct PathStats {
    double sup = 0.0, node = 0.0, step = 0.0;
    std::vector<double> increments;  // |X^n_{(c+1)/n} - X^n_{c/n}|^p per coarse step
  };
  StrongRateReport report;
  std::vector<double> ns_d;
  std::vector<Estimate> sup_e, step_e;
  std::vector<double> pointwise;
  for (std::size_t n : cfg.ns) {
    const TimeGrid grid(n, cfg.refinement);
    const std::size_t m = cfg.refinement;
    auto stats = parallel_map(cfg.n_paths, ctx.threads, [&](std::size_t i) {
      const BrownianPath path =
          sample_brownian(grid, cfg.model.dim, {ctx.seed, i, stream_id(streams::strong_rate, n)});
      const SamplePath ref = reference_solution(cfg.model, path);
      const SamplePath xn = euler_maruyama_fine(cfg.model, path, n);
      PathStats s;
      s.increments.resize(n);
      for (std::size_t j = 0; j <= grid.fine_steps(); ++j) {
        const double e = distance(ref.at(j), xn.at(j));
        s.sup = std::max(s.sup, e);
        if (j % m == 0) s.node = std::max(s.node, e);
        if (j > 0) {
          const std::size_t anchor = grid.kappa_node(j - 1);
          const double step = distance(xn.at(j), xn.at(anchor));
          s.step = std::max(s.step, step);
          if (j % m == 0) s.increments[j / m - 1] = std::pow(step, cfg.p);
        }
      }
      return s;
    });
    std::vector<double> sups(stats.size()), nodes(stats.size()), steps(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) {
      sups[i] = stats[i].sup;
      nodes[i] = stats[i].node;
      steps[i] = stats[i].step;
    }
    StrongRateRow row;
    row.n = n;
    row.sup_error = lp_norm(sups, cfg.p);
    row.node_error = lp_norm(nodes, cfg.p);
    row.step_sup = lp_norm(steps, cfg.p);
    std::vector<double> col(stats.size());
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t i = 0; i < stats.size(); ++i) col[i] = stats[i].increments[c];
      row.step_pointwise = std::max(row.step_pointwise, std::pow(pairwise_mean(col), 1.0 / cfg.p));
    }
    report.rows.push_back(row);
    ns_d.push_back(static_cast<double>(n));
    sup_e.push_back(row.sup_error);
    step_e.push_back(row.step_sup);
    pointwise.push_back(row.step_pointwise);
  }
  report.degenerate = std::all_of(report.rows.begin(), report.rows.end(),
                                  [](const auto& r) { return r.sup_error.value <= 1e-10; });
  if (cfg.ns.size() >= 3) {
    if (!report.degenerate) report.error_fit = try_fit(ns_d, sup_e);
    report.step_fit = try_fit(ns_d, step_e);
    if (std::all_of(pointwise.begin(), pointwise.end(), [](double v) { return v > 0.0; })) {
      report.step_pointwise_fit = rate_fit(ns_d, pointwise);
    }
  }
  return report;
}

// ----------------------------------------------------------------- quadrature

std::string FunctionSpec::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::one: return "one";
    case Kind::constant: os << "constant(" << value << ")"; return os.str();
    case Kind::preset: os << preset << "[" << coordinate << "]"; return os.str();
  }
  return {};
}

namespace {

using ScalarFn = std::function<double(std::span<const double>)>;

ScalarFn make_scalar(const FunctionSpec& spec, std::size_t dim) {
  switch (spec.kind) {
    case FunctionSpec::Kind::one: return [](std::span<const double>) { return 1.0; };
    case FunctionSpec::Kind::constant: {
      const double c = spec.value;
      return [c](std::span<const double>) { return c; };
    }
    case FunctionSpec::Kind::preset: {
      if (spec.coordinate >= dim) throw std::invalid_argument("function coordinate out of range");
      const Drift d = make_drift(spec.preset, spec.params, dim);
      const std::size_t k = spec.coordinate;
      return [d, k, dim](std::span<const double> x) {
        double buf[8];
        std::vector<double> heap;
        std::span<double> out(buf, dim);
        if (dim > 8) {
          heap.resize(dim);
          out = heap;
        }
        d.value(x, out);
        return out[k];
      };
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

QuadratureReport quadrature_experiment(const QuadratureConfig& cfg, const RunContext& ctx) {
  require_ns(cfg.ns, 3, "quadrature_experiment");
  validate(cfg.model);
  const ScalarFn g = make_scalar(cfg.g, cfg.model.dim);
  const ScalarFn f = make_scalar(cfg.f, cfg.model.dim);
  QuadratureReport report;
  std::vector<double> ns_d;
  std::vector<Estimate> est;
  for (std::size_t n : cfg.ns) {
    const TimeGrid grid(n, cfg.refinement);
    const double h = grid.fine_step();
    auto samples = parallel_map(cfg.n_paths, ctx.threads, [&](std::size_t i) {
      const BrownianPath path =
          sample_brownian(grid, cfg.model.dim, {ctx.seed, i, stream_id(streams::quadrature, n)});
      const SamplePath xn = euler_maruyama_fine(cfg.model, path, n);
      std::vector<double> terms(grid.fine_steps());
      double f_anchor = 0.0;
      for (std::size_t j = 0; j < grid.fine_steps(); ++j) {
        const double fx = f(xn.at(j));
        if (j % cfg.refinement == 0) f_anchor = fx;
        terms[j] = g(xn.at(j)) * (fx - f_anchor);
      }
      return h * pairwise_sum(terms);
    });
    QuadratureRow row;
    row.n = n;
    row.error = lp_norm(samples, cfg.p);
    report.rows.push_back(row);
    ns_d.push_back(static_cast<double>(n));
    est.push_back(row.error);
  }
  report.degenerate = std::any_of(report.rows.begin(), report.rows.end(),
                                  [](const auto& r) { return r.error.value == 0.0; });
  if (!report.degenerate) report.fit = try_fit(ns_d, est);
  return report;
}

// --------------------------------------------------------------- Q^X stability

QxStabilityReport qx_stability_experiment(const QxStabilityConfig& cfg, const RunContext& ctx) {
  validate(cfg.model);
  if (cfg.n_paths == 0) throw std::invalid_argument("qx_stability_experiment: n_paths must be >= 1");
  const TimeGrid grid(cfg.n, cfg.refinement);
  const double alpha = std::min(cfg.model.drift.alpha(), 1.0);
  QxStabilityReport report;
  report.gamma = cfg.gamma > 0.0 ? cfg.gamma : (1.0 + alpha) / 2.0 - 0.05;
  const double delta0 = cfg.delta0 > 0.0 ? cfg.delta0 : default_delta(cfg.n);
  const std::size_t levels = cfg.halvings + 1;
  struct PathStats {
    std::vector<double> seminorm, dist;
  };
  auto stats = parallel_map(cfg.n_paths, ctx.threads, [&](std::size_t i) {
    const BrownianPath path =
        sample_brownian(grid, cfg.model.dim, {ctx.seed, i, stream_id(streams::qx_stability, cfg.n)});
    const SamplePath x = reference_solution(cfg.model, path);
    PathStats s;
    OccupationDerivative prev;
    double delta = delta0;
    for (std::size_t k = 0; k < levels; ++k, delta /= 2.0) {
      OccupationDerivative l = qx_operator(cfg.model.drift, x, delta);
      s.seminorm.push_back(holder_seminorm(l.values, report.gamma).value);
      double d = 0.0;
      if (k > 0) {
        for (std::size_t j = 0; j < l.values.nodes(); ++j) {
          d = std::max(d, distance(l.values.at(j), prev.values.at(j)));
        }
      }
      s.dist.push_back(d);
      prev = std::move(l);
    }
    return s;
  });
  double delta = delta0;
  for (std::size_t k = 0; k < levels; ++k, delta /= 2.0) {
    QxStabilityRow row;
    row.delta = delta;
    std::vector<double> sn(stats.size()), dd(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) {
      sn[i] = stats[i].seminorm[k];
      dd[i] = stats[i].dist[k];
      row.seminorm_max = std::max(row.seminorm_max, sn[i]);
    }
    row.seminorm_mean = pairwise_mean(sn);
    row.distance_mean = pairwise_mean(dd);
    report.rows.push_back(row);
  }
  double lo = report.rows[0].seminorm_mean, hi = lo;
  for (const auto& r : report.rows) {
    lo = std::min(lo, r.seminorm_mean);
    hi = std::max(hi, r.seminorm_mean);
  }
  report.seminorm_ratio = lo > 0.0 ? hi / lo : 0.0;
  report.cauchy_decreasing = levels >= 3;
  for (std::size_t k = 2; k < levels; ++k) {
    if (!(report.rows[k].distance_mean < report.rows[k - 1].distance_mean)) {
      report.cauchy_decreasing = false;
    }
  }
  return report;
}

// ------------------------------------------------------------------------ CLT

namespace {

struct LimitSample {
  std::vector<double> values;  // times x dim
  std::size_t exits = 0;
};

std::vector<std::size_t> fine_indices(const TimeGrid& grid, const std::vector<double>& times) {
  std::vector<std::size_t> idx;
  for (double t : times) {
    const std::size_t j = grid.fine_index_of(t);
    if (j % grid.refinement() != 0) {
      throw std::invalid_argument("clt_experiment: evaluation time " + std::to_string(t) +
                                  " is not a coarse node for n = " + std::to_string(grid.n()));
    }
    idx.push_back(j);
  }
  return idx;
}

bool use_exact_gradient(const Drift& d) {
  return d.regularity() == Regularity::smooth && d.has_gradient();
}

std::vector<LimitSample> holder_limit_bank(const CltConfig& cfg, const RunContext& ctx,
                                           std::uint64_t tag_b, std::uint64_t tag_w) {
  const TimeGrid grid(cfg.limit_n, cfg.refinement);
  const auto idx = fine_indices(grid, cfg.times);
  const std::size_t d = cfg.model.dim;
  const double delta = use_exact_gradient(cfg.model.drift)
                           ? 0.0
                           : default_delta(cfg.limit_n, cfg.delta_scale);
  LimitOptions opt;
  opt.require_independent_w = true;
  return parallel_map(cfg.limit_paths, ctx.threads, [&](std::size_t i) {
    const BrownianPath b = sample_brownian(grid, d, {ctx.seed, i, stream_id(tag_b, cfg.limit_n)});
    const BrownianPath wraw =
        sample_brownian(grid, d * d, {ctx.seed, i, stream_id(tag_w, cfg.limit_n)});
    const MatrixPath w = brownian_matrix_path(wraw, d);
    const SamplePath x = reference_solution(cfg.model, b);
    const OccupationDerivative l = qx_operator(cfg.model.drift, x, delta);
    const LimitSolutionHolder v = solve_limit_holder(cfg.model, x, l, b, w, opt);
    LimitSample s;
    for (std::size_t j : idx) {
      for (double c : v.v.at(j)) s.values.push_back(c);
    }
    return s;
  });
}

std::vector<LimitSample> sobolev_limit_bank(const CltConfig& cfg, const RunContext& ctx,
                                            const PDESolution& u) {
  const TimeGrid grid(cfg.limit_n, cfg.refinement);
  const auto idx = fine_indices(grid, cfg.times);
  return parallel_map(cfg.limit_paths, ctx.threads, [&](std::size_t i) {
    const BrownianPath b =
        sample_brownian(grid, 1, {ctx.seed, i, stream_id(streams::clt_limit_b, cfg.limit_n)});
    const BrownianPath wraw =
        sample_brownian(grid, 1, {ctx.seed, i, stream_id(streams::clt_limit_w, cfg.limit_n)});
    const MatrixPath w = brownian_matrix_path(wraw, 1);
    const SamplePath x = reference_solution(cfg.model, b);
    const LimitSolutionSobolev v = solve_limit_sobolev(cfg.model, u, x, b, w);
    LimitSample s;
    s.exits = v.exits;
    for (std::size_t j : idx) s.values.push_back(v.v.values[j]);
    return s;
  });
}

std::vector<double> marginal(const std::vector<LimitSample>& bank, std::size_t k) {
  std::vector<double> out(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) out[i] = bank[i].values[k];
  return out;
}

}  // namespace

CltReport clt_experiment(const CltConfig& cfg, const RunContext& ctx) {
  require_ns(cfg.ns, 4, "clt_experiment");
  validate(cfg.model);
  if (cfg.n_paths < 1000 || cfg.limit_paths < 1000) {
    throw std::invalid_argument("clt_experiment: at least 1000 paths per bank are required");
  }
  if (cfg.times.empty()) throw std::invalid_argument("clt_experiment: no evaluation times");
  const std::size_t d = cfg.model.dim;
  CltReport report;

  std::vector<LimitSample> limit;
  std::optional<PDESolution> u;
  if (cfg.kind == CltCase::holder) {
    limit = holder_limit_bank(cfg, ctx, streams::clt_limit_b, streams::clt_limit_w);
  } else {
    if (d != 1) throw std::invalid_argument("clt_experiment: the sobolev case requires d = 1");
    u = solve_corrector_pde(cfg.model, cfg.theta, cfg.half_width, cfg.pde);
    report.pde_sup_grad = u->sup_grad;
    limit = sobolev_limit_bank(cfg, ctx, *u);
    for (const auto& s : limit) report.exits += s.exits;
  }

  const std::size_t nt = cfg.times.size();
  std::vector<std::vector<LimitSample>> banks;
  for (std::size_t n : cfg.ns) {
    const TimeGrid grid(n, cfg.refinement);
    const auto idx = fine_indices(grid, cfg.times);
    banks.push_back(parallel_map(cfg.n_paths, ctx.threads, [&](std::size_t i) {
      const BrownianPath path = sample_brownian(grid, d, {ctx.seed, i, stream_id(streams::clt_scheme, n)});
      const SamplePath ref = reference_solution(cfg.model, path);
      const SamplePath xn = euler_maruyama(cfg.model, path, n);
      const double scale = std::sqrt(static_cast<double>(n));
      LimitSample s;
      for (std::size_t j : idx) {
        const auto r = ref.at(j);
        const auto c = xn.at(j / cfg.refinement);
        for (std::size_t k = 0; k < d; ++k) s.values.push_back(scale * (r[k] - c[k]));
      }
      return s;
    }));
  }

  for (std::size_t a = 0; a < cfg.ns.size(); ++a) {
    for (std::size_t ti = 0; ti < nt; ++ti) {
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t col = ti * d + k;
        const auto x = marginal(banks[a], col);
        const auto y = marginal(limit, col);
        CltRow row;
        row.n = cfg.ns[a];
        row.time = cfg.times[ti];
        row.coordinate = k;
        row.ks = ks_statistic(x, y);
        row.w1 = w1_distance(x, y);
        const std::uint64_t bseed = ctx.seed ^ stream_id(streams::statistics, (a << 16) | (col + 1));
        row.w1_se = w1_bootstrap_se(x, y, cfg.bootstrap, bseed);
        report.rows.push_back(row);
      }
    }
  }

  for (std::size_t ti = 0; ti < nt; ++ti) {
    for (std::size_t k = 0; k < d; ++k) {
      CltTrend tr;
      tr.time = cfg.times[ti];
      tr.coordinate = k;
      tr.monotone = true;
      std::vector<const CltRow*> series;
      for (const auto& r : report.rows) {
        if (r.time == tr.time && r.coordinate == k) series.push_back(&r);
      }
      for (std::size_t i = 1; i < series.size(); ++i) {
        const double slack =
            2.0 * std::hypot(series[i - 1]->w1_se, series[i]->w1_se);
        if (series[i]->w1 > series[i - 1]->w1 + slack) tr.monotone = false;
      }
      tr.ratio = series.front()->w1 > 0.0 ? series.back()->w1 / series.front()->w1 : 0.0;
      report.trends.push_back(tr);
    }
  }

  const std::size_t last_t = nt - 1;
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t col = last_t * d + k;
    report.floors.push_back(w1_permutation_floor(
        marginal(banks.back(), col), marginal(limit, col), cfg.floor_splits,
        ctx.seed ^ stream_id(streams::statistics, 0xf100 + k)));
  }

  if (cfg.kind == CltCase::sobolev && cfg.cross_check && use_exact_gradient(cfg.model.drift)) {
    const auto other = holder_limit_bank(cfg, ctx, streams::clt_cross_b, streams::clt_cross_w);
    const auto x = marginal(limit, last_t);
    const auto y = marginal(other, last_t);
    CltCrossCheck cross;
    cross.w1 = w1_distance(x, y);
    cross.ks = ks_statistic(x, y);
    cross.floor = w1_permutation_floor(x, y, cfg.floor_splits,
                                       ctx.seed ^ stream_id(streams::statistics, 0xc000));
    report.cross = cross;
  }
  return report;
}

// -------------------------------------------------------------- zvonkin sweep

ZvonkinSweepReport zvonkin_sweep(const ZvonkinSweepConfig& cfg) {
  if (cfg.thetas.empty()) throw std::invalid_argument("zvonkin_sweep: theta list is empty");
  ZvonkinSweepReport report;
  std::vector<PDESolution> sols;
  for (double theta : cfg.thetas) {
    PDESolution s = solve_corrector_pde(cfg.model, theta, cfg.half_width, cfg.pde);
    ZvonkinSweepRow row;
    row.theta = theta;
    row.sup_grad = s.sup_grad;
    row.max_residual = s.max_residual;
    row.usable = s.usable();
    double sup_b = 0.0;
    for (std::size_t i = 0; i < s.nx; ++i) {
      const double x = s.x(i);
      double b = 0.0;
      cfg.model.drift.value(std::span<const double>(&x, 1), std::span<double>(&b, 1));
      sup_b = std::max(sup_b, std::abs(b));
    }
    for (double v : s.u) row.sup_u = std::max(row.sup_u, std::abs(v));
    row.max_principle_bound = sup_b / theta;
    report.rows.push_back(row);
    sols.push_back(std::move(s));
  }
  report.table = check_gradient_bound(sols);
  return report;
}

// ----------------------------------------------------------------- area check

AreaCheckReport area_check(const AreaCheckConfig& cfg, const RunContext& ctx) {
  if (cfg.dim == 0 || cfg.n == 0 || cfg.refinements.empty() || cfg.n_paths < 2) {
    throw std::invalid_argument("area_check: invalid configuration");
  }
  const std::size_t d = cfg.dim, dd = d * d;
  AreaCheckReport report;
  std::vector<double> ms, l2s;
  for (std::size_t m : cfg.refinements) {
    const TimeGrid grid(cfg.n, m);
    const double scale = std::sqrt(2.0 * static_cast<double>(cfg.n));
    const double dt = grid.coarse_step();
    auto stats = parallel_map(cfg.n_paths, ctx.threads, [&](std::size_t i) {
      const BrownianPath path = sample_brownian(grid, d, {ctx.seed, i, stream_id(streams::area_check, m)});
      const MatrixPath w = area_process(path, cfg.n);
      const std::vector<double> b = path.values();
      std::vector<double> out(dd + 1, 0.0);  // squared residual sum, then W_1 entries
      for (std::size_t c = 0; c < cfg.n; ++c) {
        for (std::size_t k = 0; k < d; ++k) {
          const double db = b[(c + 1) * m * d + k] - b[c * m * d + k];
          const double dw = w.entry((c + 1) * m, k, k) - w.entry(c * m, k, k);
          const double r = dw - scale * (db * db - dt) / 2.0;
          out[0] += r * r;
        }
      }
      const auto last = w.at(grid.fine_steps());
      for (std::size_t e = 0; e < dd; ++e) out[1 + e] = last[e] * last[e];
      return out;
    });
    AreaCheckRow row;
    row.refinement = m;
    row.var_expected = 1.0 - 1.0 / static_cast<double>(m);
    row.diag_l2 = std::sqrt(pairwise_mean(column(stats, 0)) / static_cast<double>(cfg.n * d));
    for (std::size_t e = 0; e < dd; ++e) row.var.push_back(mean_estimate(column(stats, 1 + e)));
    report.rows.push_back(row);
    ms.push_back(static_cast<double>(m));
    l2s.push_back(row.diag_l2);
  }
  if (ms.size() >= 3 && std::all_of(l2s.begin(), l2s.end(), [](double v) { return v > 0.0; })) {
    bool inc = true;
    for (std::size_t i = 1; i < ms.size(); ++i) inc = inc && ms[i] > ms[i - 1];
    if (inc) report.diag_fit = rate_fit(ms, l2s);
  }
  return report;
}

}  // namespace emclt
