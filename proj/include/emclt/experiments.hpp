#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emclt/model.hpp"
#include "emclt/presets.hpp"
#include "emclt/stats.hpp"
#include "emclt/zvonkin.hpp"

namespace emclt {

/// Master seed and worker cap shared by all experiments. Results depend on
/// the seed only.
struct RunContext {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

// Stream tags keep the random drivers of different banks apart.
namespace streams {
inline constexpr std::uint64_t strong_rate = 0x10;
inline constexpr std::uint64_t quadrature = 0x20;
inline constexpr std::uint64_t qx_stability = 0x30;
inline constexpr std::uint64_t clt_scheme = 0x40;
inline constexpr std::uint64_t clt_limit_b = 0x41;
inline constexpr std::uint64_t clt_limit_w = 0x42;
inline constexpr std::uint64_t clt_cross_b = 0x43;
inline constexpr std::uint64_t clt_cross_w = 0x44;
inline constexpr std::uint64_t area_check = 0x50;
inline constexpr std::uint64_t statistics = 0x60;
}  // namespace streams

/// Stream id for one bank at one scheme parameter.
inline std::uint64_t stream_id(std::uint64_t tag, std::uint64_t n) { return (tag << 40) | n; }

// ---------------------------------------------------------------- strong rate

struct StrongRateConfig {
  ModelSpec model;
  std::vector<std::size_t> ns;
  std::size_t refinement = 64;
  std::size_t n_paths = 10000;
  double p = 2.0;
};

struct StrongRateRow {
  std::size_t n = 0;
  Estimate sup_error;       // || sup_t |X_t - X^n_t| ||_{L_p}, fine nodes
  Estimate node_error;      // same, coarse nodes only
  Estimate step_sup;        // || sup_t |X^n_t - X^n_{kappa_n(t)}| ||_{L_p}
  double step_pointwise = 0.0;  // sup_t || X^n_t - X^n_{kappa_n(t)} ||_{L_p}
};

struct StrongRateReport {
  std::vector<StrongRateRow> rows;
  bool degenerate = false;  // errors vanish (scheme exact); fit skipped
  std::optional<RateFit> error_fit;
  std::optional<RateFit> step_fit;
  std::optional<RateFit> step_pointwise_fit;
};

/// Couples the nM-step reference with X^n on one Brownian path per sample.
StrongRateReport strong_rate_experiment(const StrongRateConfig& cfg, const RunContext& ctx);

// ----------------------------------------------------------------- quadrature

/// Scalar test function x -> h(x): identically one, a constant, or one
/// coordinate of a drift preset.
struct FunctionSpec {
  enum class Kind { one, constant, preset };
  Kind kind = Kind::one;
  double value = 1.0;
  std::string preset;
  PresetParams params;
  std::size_t coordinate = 0;

  std::string label() const;
};

struct QuadratureConfig {
  ModelSpec model;
  FunctionSpec g;
  FunctionSpec f;
  std::vector<std::size_t> ns;
  std::size_t refinement = 64;
  std::size_t n_paths = 10000;
  double p = 2.0;
};

struct QuadratureRow {
  std::size_t n = 0;
  Estimate error;  // || int_0^1 g(X^n_r)(f(X^n_r) - f(X^n_{kappa_n(r)})) dr ||_{L_p}
};

struct QuadratureReport {
  std::vector<QuadratureRow> rows;
  bool degenerate = false;  // integrand vanishes identically (f constant)
  std::optional<RateFit> fit;
};

/// Left-point fine sums of the integrand along X^n evaluated at fine nodes.
/// Throws std::invalid_argument for fewer than 3 values of n.
QuadratureReport quadrature_experiment(const QuadratureConfig& cfg, const RunContext& ctx);

// --------------------------------------------------------------- Q^X stability

struct QxStabilityConfig {
  ModelSpec model;
  std::size_t n = 1024;
  std::size_t refinement = 64;
  std::size_t n_paths = 16;
  double delta0 = 0.0;  // 0 selects n^{-1/2}
  std::size_t halvings = 3;
  double gamma = 0.0;  // 0 selects (1 + alpha)/2 - 0.05
};

struct QxStabilityRow {
  double delta = 0.0;
  double seminorm_mean = 0.0;
  double seminorm_max = 0.0;
  double distance_mean = 0.0;  // mean sup_t |L_delta - L_{2 delta}|, 0 for the first row
};

struct QxStabilityReport {
  std::vector<QxStabilityRow> rows;
  double gamma = 0.0;
  double seminorm_ratio = 0.0;  // max/min of seminorm_mean over the schedule
  bool cauchy_decreasing = false;
};

QxStabilityReport qx_stability_experiment(const QxStabilityConfig& cfg, const RunContext& ctx);

// ------------------------------------------------------------------------ CLT

enum class CltCase { holder, sobolev };

struct CltConfig {
  ModelSpec model;
  CltCase kind = CltCase::holder;
  std::vector<std::size_t> ns;
  std::size_t refinement = 64;
  std::size_t n_paths = 10000;      // scheme bank per n
  std::size_t limit_paths = 10000;  // limit bank
  std::vector<double> times{0.25, 0.5, 1.0};
  std::size_t limit_n = 256;  // limit bank grid: limit_n * refinement fine steps
  double delta_scale = 1.0;   // mollification delta = scale / sqrt(limit_n); unused for smooth b
  double theta = 64.0;        // corrector parameter (sobolev case)
  double half_width = 8.0;
  PdeResolution pde;
  bool cross_check = true;  // sobolev case: also build an independent Hoelder-limit bank
  std::size_t bootstrap = 200;
  std::size_t floor_splits = 20;
};

struct CltRow {
  std::size_t n = 0;
  double time = 0.0;
  std::size_t coordinate = 0;
  double ks = 0.0;
  double w1 = 0.0;
  double w1_se = 0.0;
};

struct CltTrend {
  double time = 0.0;
  std::size_t coordinate = 0;
  bool monotone = false;      // w_{i+1} <= w_i + 2 sqrt(se_i^2 + se_{i+1}^2)
  double ratio = 0.0;         // w1 at the largest n over w1 at the smallest n
};

struct CltCrossCheck {
  double w1 = 0.0;     // between the Sobolev-pipeline and Hoelder-pipeline V_1 banks
  double floor = 0.0;  // permutation floor of the pooled banks
  double ks = 0.0;
};

struct CltReport {
  std::vector<CltRow> rows;
  std::vector<CltTrend> trends;
  std::vector<double> floors;  // permutation floor at t = 1 per coordinate, n = largest
  std::optional<CltCrossCheck> cross;
  double pde_sup_grad = 0.0;
  std::size_t exits = 0;
};

/// Bank A: V^n marginals from the scheme. Bank B: limit V from the Hoelder
/// solver or the transformed Sobolev solver with an independent W. Throws for
/// fewer than 1000 paths or fewer than 4 values of n.
CltReport clt_experiment(const CltConfig& cfg, const RunContext& ctx);

// -------------------------------------------------------------- zvonkin sweep

struct ZvonkinSweepConfig {
  ModelSpec model;
  std::vector<double> thetas;
  double half_width = 8.0;
  PdeResolution pde;
};

struct ZvonkinSweepRow {
  double theta = 0.0;
  double sup_grad = 0.0;
  double sup_u = 0.0;
  double max_principle_bound = 0.0;  // sup|b| / theta
  double max_residual = 0.0;
  bool usable = false;
};

struct ZvonkinSweepReport {
  std::vector<ZvonkinSweepRow> rows;
  GradientBoundTable table;
};

ZvonkinSweepReport zvonkin_sweep(const ZvonkinSweepConfig& cfg);

// ----------------------------------------------------------------- area check

struct AreaCheckConfig {
  std::size_t dim = 2;
  std::size_t n = 8;
  std::vector<std::size_t> refinements{16, 64, 256};
  std::size_t n_paths = 100000;
};

struct AreaCheckRow {
  std::size_t refinement = 0;
  double diag_l2 = 0.0;         // L2 residual of the per-step diagonal identity
  std::vector<Estimate> var;    // Var(W^{(k,i)}_1), row-major
  double var_expected = 0.0;    // 1 - 1/M for the discrete area process
};

struct AreaCheckReport {
  std::vector<AreaCheckRow> rows;
  std::optional<RateFit> diag_fit;  // diag_l2 against M
};

AreaCheckReport area_check(const AreaCheckConfig& cfg, const RunContext& ctx);

}  // namespace emclt
