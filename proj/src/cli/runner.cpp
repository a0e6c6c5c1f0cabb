#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "emclt/cli.hpp"
#include "emclt/montecarlo.hpp"

#ifndef EMCLT_CODE_VERSION
#define EMCLT_CODE_VERSION "unknown"
#endif

namespace emclt::cli {

using nlohmann::json;

std::string code_version() { return EMCLT_CODE_VERSION; }

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json fit_json(const std::optional<RateFit>& fit) {
  if (!fit) return nullptr;
  return {{"slope", fit->slope},
          {"intercept", fit->intercept},
          {"r_squared", fit->r_squared},
          {"slope_ci95", {fit->slope_lo, fit->slope_hi}},
          {"weighted", fit->weighted}};
}

class Checks {
 public:
  void add(const std::string& name, bool pass, json value, json threshold) {
    items_[name] = {{"pass", pass}, {"value", std::move(value)}, {"threshold", std::move(threshold)}};
    all_ = all_ && pass;
  }
  bool all() const { return all_; }
  const json& items() const { return items_; }

 private:
  json items_ = json::object();
  bool all_ = true;
};

void check_slope(Checks& checks, const std::string& name, const std::optional<RateFit>& fit,
                 const json& lo, const json& hi) {
  if (!fit) {
    checks.add(name, false, nullptr, {lo, hi});
    return;
  }
  const bool ok = (lo.is_null() || fit->slope >= lo.get<double>()) &&
                  (hi.is_null() || fit->slope <= hi.get<double>());
  checks.add(name, ok, fit->slope, {lo, hi});
}

RunResult run_strong_rate(const ExperimentConfig& cfg, const ModelSpec& model, const RunContext& ctx) {
  StrongRateConfig sc{model, cfg.ns, cfg.refinement, cfg.n_paths, cfg.p};
  const StrongRateReport rep = strong_rate_experiment(sc, ctx);
  RunResult out;
  std::ostringstream csv;
  csv << "n,sup_error,sup_error_se,node_error,node_error_se,step_sup,step_sup_se,step_pointwise\n";
  for (const auto& r : rep.rows) {
    csv << r.n << ',' << num(r.sup_error.value) << ',' << num(r.sup_error.se) << ','
        << num(r.node_error.value) << ',' << num(r.node_error.se) << ',' << num(r.step_sup.value)
        << ',' << num(r.step_sup.se) << ',' << num(r.step_pointwise) << '\n';
  }
  out.csv = csv.str();
  Checks checks;
  const json& c = cfg.check;
  if (rep.degenerate) {
    checks.add("error_slope", true, "degenerate: scheme exact, fit skipped",
               {c["slope_min"], c["slope_max"]});
  } else {
    check_slope(checks, "error_slope", rep.error_fit, c["slope_min"], c["slope_max"]);
  }
  if (c["step_size"].get<bool>()) {
    check_slope(checks, "step_slope", rep.step_fit, c["step_slope_min"], c["step_slope_max"]);
    const bool r2 = rep.step_fit && rep.step_fit->r_squared >= c["step_r2_min"].get<double>();
    checks.add("step_r_squared", r2, rep.step_fit ? json(rep.step_fit->r_squared) : json(nullptr),
               c["step_r2_min"]);
  }
  out.summary = {{"degenerate", rep.degenerate},
                 {"error_fit", fit_json(rep.error_fit)},
                 {"step_fit", fit_json(rep.step_fit)},
                 {"step_pointwise_fit", fit_json(rep.step_pointwise_fit)},
                 {"checks", checks.items()}};
  out.passed = checks.all();
  return out;
}

RunResult run_quadrature(const ExperimentConfig& cfg, const ModelSpec& model, const RunContext& ctx) {
  QuadratureConfig qc{model, cfg.g, cfg.f, cfg.ns, cfg.refinement, cfg.n_paths, cfg.p};
  const QuadratureReport rep = quadrature_experiment(qc, ctx);
  RunResult out;
  std::ostringstream csv;
  csv << "n,error,error_se\n";
  for (const auto& r : rep.rows) {
    csv << r.n << ',' << num(r.error.value) << ',' << num(r.error.se) << '\n';
  }
  out.csv = csv.str();
  Checks checks;
  if (rep.degenerate) {
    checks.add("slope", true, "degenerate: integrand vanishes, fit skipped", cfg.check["slope_max"]);
  } else {
    check_slope(checks, "slope", rep.fit, nullptr, cfg.check["slope_max"]);
  }
  out.summary = {{"g", cfg.g.label()},
                 {"f", cfg.f.label()},
                 {"degenerate", rep.degenerate},
                 {"fit", fit_json(rep.fit)},
                 {"checks", checks.items()}};
  out.passed = checks.all();
  return out;
}

RunResult run_qx(const ExperimentConfig& cfg, const ModelSpec& model, const RunContext& ctx) {
  QxStabilityConfig qc;
  qc.model = model;
  qc.n = cfg.qx_n;
  qc.refinement = cfg.refinement;
  qc.n_paths = cfg.n_paths;
  qc.delta0 = cfg.delta0;
  qc.halvings = cfg.halvings;
  qc.gamma = cfg.gamma;
  const QxStabilityReport rep = qx_stability_experiment(qc, ctx);
  RunResult out;
  std::ostringstream csv;
  csv << "delta,seminorm_mean,seminorm_max,cauchy_distance\n";
  for (const auto& r : rep.rows) {
    csv << num(r.delta) << ',' << num(r.seminorm_mean) << ',' << num(r.seminorm_max) << ','
        << num(r.distance_mean) << '\n';
  }
  out.csv = csv.str();
  Checks checks;
  const json& c = cfg.check;
  if (!c["seminorm_ratio_max"].is_null()) {
    checks.add("seminorm_ratio", rep.seminorm_ratio <= c["seminorm_ratio_max"].get<double>(),
               rep.seminorm_ratio, c["seminorm_ratio_max"]);
  }
  if (c["cauchy_decreasing"].get<bool>()) {
    checks.add("cauchy_decreasing", rep.cauchy_decreasing, rep.cauchy_decreasing, true);
  }
  out.summary = {{"gamma", rep.gamma},
                 {"seminorm_ratio", rep.seminorm_ratio},
                 {"cauchy_decreasing", rep.cauchy_decreasing},
                 {"checks", checks.items()}};
  out.passed = checks.all();
  return out;
}

RunResult run_clt(const ExperimentConfig& cfg, const ModelSpec& model, const RunContext& ctx) {
  CltConfig cc;
  cc.model = model;
  cc.kind = cfg.experiment == "clt-sobolev" ? CltCase::sobolev : CltCase::holder;
  cc.ns = cfg.ns;
  cc.refinement = cfg.refinement;
  cc.n_paths = cfg.n_paths;
  cc.limit_paths = cfg.limit_paths;
  cc.times = cfg.times;
  cc.limit_n = cfg.limit_n;
  cc.delta_scale = cfg.delta_scale;
  cc.theta = cfg.theta;
  cc.half_width = cfg.half_width;
  cc.pde = cfg.pde;
  cc.cross_check = cfg.cross_check;
  cc.bootstrap = cfg.bootstrap;
  cc.floor_splits = cfg.floor_splits;
  const CltReport rep = clt_experiment(cc, ctx);
  RunResult out;
  std::ostringstream csv;
  csv << "n,time,coordinate,ks,w1,w1_se\n";
  for (const auto& r : rep.rows) {
    csv << r.n << ',' << num(r.time) << ',' << r.coordinate << ',' << num(r.ks) << ','
        << num(r.w1) << ',' << num(r.w1_se) << '\n';
  }
  out.csv = csv.str();
  Checks checks;
  const json& c = cfg.check;
  json trends = json::array();
  for (const auto& t : rep.trends) {
    trends.push_back({{"time", t.time}, {"coordinate", t.coordinate}, {"monotone", t.monotone},
                      {"ratio_last_first", t.ratio}});
    if (t.time != c["time"].get<double>()) continue;
    const std::string tag = "coordinate_" + std::to_string(t.coordinate);
    checks.add("monotone_" + tag, t.monotone, t.monotone, "2-SE slack");
    if (!c["ratio_max"].is_null()) {
      checks.add("ratio_" + tag, t.ratio <= c["ratio_max"].get<double>(), t.ratio, c["ratio_max"]);
    }
  }
  json cross = nullptr;
  if (rep.cross) {
    cross = {{"w1", rep.cross->w1}, {"ks", rep.cross->ks}, {"floor", rep.cross->floor}};
    if (c.contains("cross_floor_factor") && !c["cross_floor_factor"].is_null()) {
      const double bound = c["cross_floor_factor"].get<double>() * rep.cross->floor;
      checks.add("cross_pipeline_w1", rep.cross->w1 <= bound, rep.cross->w1, bound);
    }
  }
  out.summary = {{"trends", trends},
                 {"floor_t1", rep.floors},
                 {"cross_pipeline", cross},
                 {"checks", checks.items()}};
  if (cc.kind == CltCase::sobolev) {
    out.summary["pde_sup_grad"] = rep.pde_sup_grad;
    out.summary["exits"] = rep.exits;
  }
  out.passed = checks.all();
  return out;
}

RunResult run_zvonkin(const ExperimentConfig& cfg, const ModelSpec& model) {
  ZvonkinSweepConfig zc{model, cfg.thetas, cfg.half_width, cfg.pde};
  const ZvonkinSweepReport rep = zvonkin_sweep(zc);
  RunResult out;
  std::ostringstream csv;
  csv << "theta,sup_grad,sup_u,max_principle_bound,max_residual,usable\n";
  for (const auto& r : rep.rows) {
    csv << num(r.theta) << ',' << num(r.sup_grad) << ',' << num(r.sup_u) << ','
        << num(r.max_principle_bound) << ',' << num(r.max_residual) << ','
        << (r.usable ? 1 : 0) << '\n';
  }
  out.csv = csv.str();
  Checks checks;
  std::optional<RateFit> fit;
  if (rep.table.fitted) fit = rep.table.fit;
  if (fit) {
    check_slope(checks, "gradient_slope", fit, nullptr, cfg.check["slope_max"]);
  } else {
    checks.add("gradient_slope", true, "not fitted: gradient vanishes", cfg.check["slope_max"]);
  }
  bool maxp = true;
  for (const auto& r : rep.rows) maxp = maxp && r.sup_u <= r.max_principle_bound * (1.0 + 1e-6) + 1e-12;
  checks.add("maximum_principle", maxp, maxp, "sup|u| <= sup|b|/theta");
  out.summary = {{"gradient_fit", fit_json(fit)}, {"checks", checks.items()}};
  out.passed = checks.all();
  return out;
}

RunResult run_area(const ExperimentConfig& cfg, const RunContext& ctx) {
  AreaCheckConfig ac{cfg.model.dim, cfg.area_n, cfg.refinements, cfg.n_paths};
  const AreaCheckReport rep = area_check(ac, ctx);
  RunResult out;
  std::ostringstream csv;
  csv << "M,k,i,var,var_se,var_expected,diag_l2\n";
  const std::size_t d = cfg.model.dim;
  Checks checks;
  const json& c = cfg.check;
  bool var_ok = true;
  double worst = 0.0;
  for (const auto& r : rep.rows) {
    for (std::size_t e = 0; e < d * d; ++e) {
      csv << r.refinement << ',' << e / d << ',' << e % d << ',' << num(r.var[e].value) << ','
          << num(r.var[e].se) << ',' << num(r.var_expected) << ',' << num(r.diag_l2) << '\n';
      if (r.refinement >= c["var_min_M"].get<std::size_t>()) {
        const double dev = std::abs(r.var[e].value - 1.0);
        worst = std::max(worst, dev);
        var_ok = var_ok && dev <= c["var_tolerance"].get<double>();
      }
    }
  }
  out.csv = csv.str();
  check_slope(checks, "diagonal_residual_slope", rep.diag_fit, c["slope_min"], c["slope_max"]);
  checks.add("variance", var_ok, worst, c["var_tolerance"]);
  out.summary = {{"diag_fit", fit_json(rep.diag_fit)}, {"checks", checks.items()}};
  out.passed = checks.all();
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

RunResult execute(const ExperimentConfig& cfg, std::size_t threads) {
  const RunContext ctx{cfg.seed, threads};
  const std::string& e = cfg.experiment;
  RunResult out;
  if (e == "area-check") {
    out = run_area(cfg, ctx);
  } else {
    const ModelSpec model = make_model(cfg.model);
    if (e == "strong-rate") out = run_strong_rate(cfg, model, ctx);
    else if (e == "quadrature") out = run_quadrature(cfg, model, ctx);
    else if (e == "qx-stability") out = run_qx(cfg, model, ctx);
    else if (e == "clt-holder" || e == "clt-sobolev") out = run_clt(cfg, model, ctx);
    else if (e == "zvonkin-sweep") out = run_zvonkin(cfg, model);
    else throw std::invalid_argument("unknown experiment '" + e + "'");
  }
  out.summary["experiment"] = e;
  out.summary["passed"] = out.passed;
  return out;
}

int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out,
        std::ostream& err) {
  std::vector<std::filesystem::path> written;
  bool created_dir = false;
  std::filesystem::path dir;
  try {
    ExperimentConfig cfg = load_config(config_path);
    if (options.seed) cfg.seed = *options.seed;
    if (options.out) cfg.output = *options.out;
    const std::size_t threads = resolve_threads(options.threads);
    err << "emclt: running " << cfg.experiment << " (seed " << cfg.seed << ", " << threads
        << " thread" << (threads == 1 ? "" : "s") << ")\n";
    const RunResult result = execute(cfg, threads);

    dir = cfg.output;
    if (!std::filesystem::exists(dir)) {
      std::filesystem::create_directories(dir);
      created_dir = true;
    }
    const std::string summary = result.summary.dump(2) + "\n";
    json manifest;
    manifest["config"] = to_json(cfg);
    manifest["config_sha256"] = config_hash(cfg);
    manifest["seed"] = cfg.seed;
    manifest["code_version"] = code_version();
    manifest["threads"] = threads;
    manifest["outputs"] = {{"results.csv", sha256_hex(result.csv)},
                           {"summary.json", sha256_hex(summary)}};
    for (const auto& [name, content] :
         {std::pair<std::string, std::string>{"results.csv", result.csv},
          {"summary.json", summary},
          {"manifest.json", manifest.dump(2) + "\n"}}) {
      written.push_back(dir / name);
      write_file(dir / name, content);
    }
    out << "wrote " << (dir / "results.csv").string() << ", summary.json, manifest.json\n";
    if (options.check && !result.passed) {
      for (const auto& [name, item] : result.summary["checks"].items()) {
        if (!item["pass"].get<bool>()) {
          err << "emclt: check failed: " << name << " value " << item["value"].dump()
              << " threshold " << item["threshold"].dump() << "\n";
        }
      }
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "emclt: error: " << e.what() << "\n";
    std::error_code ec;
    for (const auto& p : written) {
      std::filesystem::remove(p, ec);
      std::filesystem::path tmp = p;
      tmp += ".partial";
      std::filesystem::remove(tmp, ec);
    }
    if (created_dir) std::filesystem::remove(dir, ec);
    return 1;
  }
}

}  // namespace emclt::cli
