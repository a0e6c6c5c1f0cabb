#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "emclt/averaging.hpp"
#include "emclt/cli.hpp"

namespace emclt::cli {

using nlohmann::json;

namespace {

// Typed access to one JSON object; remembers the keys it has seen so that
// unknown keys can be reported with their full path.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(display(), "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::string str(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  double num(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(key), "expected a finite number");
    return d;
  }

  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(field(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> nums(const std::string& key, const std::vector<double>& fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::size_t> uints(const std::string& key, const std::vector<std::size_t>& fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 0) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]",
                          "expected a non-negative integer");
      }
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }

  PresetParams params(const std::string& key) {
    PresetParams out;
    if (!has(key)) return out;
    const json& v = obj_.at(key);
    if (!v.is_object()) throw ConfigError(field(key), "expected an object of numbers");
    for (const auto& [k, val] : v.items()) {
      if (!val.is_number()) throw ConfigError(field(key) + "." + k, "expected a number");
      out[k] = val.get<double>();
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ConfigError(field(k), "unknown field");
    }
  }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

void require_increasing(const std::vector<std::size_t>& v, const std::string& field,
                        const std::string& name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] > 0, field + "[" + std::to_string(i) + "]", "values must be positive");
    if (i > 0) require(v[i] > v[i - 1], field, name + " must be increasing");
  }
}

FunctionSpec parse_function(Reader& parent, const std::string& key, const FunctionSpec& fallback,
                            std::size_t dim) {
  if (!parent.has(key)) return fallback;
  Reader r(parent.raw(key), parent.field(key));
  FunctionSpec f;
  const std::string kind = r.str("kind", "one");
  if (kind == "one") {
    f.kind = FunctionSpec::Kind::one;
  } else if (kind == "constant") {
    f.kind = FunctionSpec::Kind::constant;
    f.value = r.num("value", 1.0);
  } else if (kind == "preset") {
    f.kind = FunctionSpec::Kind::preset;
    f.preset = r.str("preset", "");
    require(is_drift_preset(f.preset), r.field("preset"), "unknown preset '" + f.preset + "'");
    f.params = r.params("params");
    f.coordinate = r.uint("coordinate", 0);
    require(f.coordinate < dim, r.field("coordinate"), "coordinate out of range");
    try {
      (void)make_drift(f.preset, f.params, dim);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(r.field("params"), e.what());
    }
  } else {
    throw ConfigError(r.field("kind"), "expected one of one, constant, preset");
  }
  r.finish();
  return f;
}

json function_json(const FunctionSpec& f) {
  switch (f.kind) {
    case FunctionSpec::Kind::one: return {{"kind", "one"}};
    case FunctionSpec::Kind::constant: return {{"kind", "constant"}, {"value", f.value}};
    case FunctionSpec::Kind::preset:
      return {{"kind", "preset"},
              {"preset", f.preset},
              {"params", json(f.params)},
              {"coordinate", f.coordinate}};
  }
  return {};
}

bool smooth_function(const FunctionSpec& f, std::size_t dim) {
  if (f.kind != FunctionSpec::Kind::preset) return true;
  return make_drift(f.preset, f.params, dim).regularity() == Regularity::smooth;
}

json default_checks(const ExperimentConfig& cfg, const ModelSpec& model) {
  const bool smooth = model.drift.regularity() == Regularity::smooth;
  const std::string& e = cfg.experiment;
  if (e == "strong-rate") {
    return {{"slope_min", -0.6},        {"slope_max", smooth ? -0.4 : -0.35},
            {"step_size", false},       {"step_slope_min", -0.6},
            {"step_slope_max", -0.4},   {"step_r2_min", 0.98}};
  }
  if (e == "quadrature") {
    const bool c2 = smooth_function(cfg.f, model.dim) &&
                    cfg.g.kind != FunctionSpec::Kind::preset;
    return {{"slope_max", c2 ? -0.9 : -0.55}};
  }
  if (e == "qx-stability") return {{"seminorm_ratio_max", 2.0}, {"cauchy_decreasing", true}};
  if (e == "clt-holder") {
    return {{"time", 1.0}, {"ratio_max", smooth ? json(0.5) : json(nullptr)}};
  }
  if (e == "clt-sobolev") {
    return {{"time", 1.0}, {"ratio_max", nullptr}, {"cross_floor_factor", 2.0}};
  }
  if (e == "zvonkin-sweep") return {{"slope_max", -0.3}};
  return {{"slope_min", -0.6}, {"slope_max", -0.4}, {"var_tolerance", 0.03}, {"var_min_M", 64}};
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (doc.is_object() && doc.contains("config") && doc.contains("config_sha256")) {
    return parse_config(doc.at("config"));
  }
  Reader root(doc, "");
  ExperimentConfig cfg;
  cfg.experiment = root.str("experiment", "");
  require(std::find(std::begin(kExperiments), std::end(kExperiments), cfg.experiment) !=
              std::end(kExperiments),
          "experiment",
          "expected one of strong-rate, quadrature, qx-stability, clt-holder, clt-sobolev, "
          "zvonkin-sweep, area-check");
  const std::string& e = cfg.experiment;

  if (root.has("model")) {
    Reader m(root.raw("model"), "model");
    cfg.model.drift = m.str("drift", cfg.model.drift);
    require(is_drift_preset(cfg.model.drift), "model.drift",
            "unknown drift preset '" + cfg.model.drift + "'");
    cfg.model.drift_params = m.params("drift_params");
    cfg.model.diffusion = m.str("diffusion", cfg.model.diffusion);
    require(is_diffusion_preset(cfg.model.diffusion), "model.diffusion",
            "unknown diffusion preset '" + cfg.model.diffusion + "'");
    cfg.model.diffusion_params = m.params("diffusion_params");
    cfg.model.dim = m.uint("dim", 1);
    require(cfg.model.dim >= 1 && cfg.model.dim <= 8, "model.dim", "must lie in 1..8");
    cfg.model.x0 = m.nums("x0", {});
    require(cfg.model.x0.empty() || cfg.model.x0.size() == cfg.model.dim, "model.x0",
            "length must equal model.dim");
    if (m.has("lambda")) {
      cfg.model.lambda = m.num("lambda", 1.0);
      require(*cfg.model.lambda > 0.0, "model.lambda", "must be positive");
    }
    m.finish();
  }
  if (cfg.model.x0.empty()) cfg.model.x0.assign(cfg.model.dim, 0.0);
  ModelSpec model;
  try {
    model = make_model(cfg.model);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("model", ex.what());
  }

  const bool needs_ns = e == "strong-rate" || e == "quadrature" || e == "clt-holder" ||
                        e == "clt-sobolev";
  cfg.ns = root.uints("ns", {});
  if (needs_ns) require(!cfg.ns.empty(), "ns", "required for experiment " + e);
  require_increasing(cfg.ns, "ns", "ns");
  if (e == "quadrature") require(cfg.ns.size() >= 3, "ns", "at least 3 values are required");
  if (e == "clt-holder" || e == "clt-sobolev") {
    require(cfg.ns.size() >= 4, "ns", "at least 4 values are required for a trend test");
  }
  cfg.refinement = root.uint("M", cfg.refinement);
  require(cfg.refinement >= 1, "M", "must be >= 1");
  cfg.n_paths = root.uint("n_paths", cfg.n_paths);
  require(cfg.n_paths >= 2, "n_paths", "must be >= 2");
  cfg.p = root.num("p", cfg.p);
  require(cfg.p >= 1.0, "p", "must be >= 1");
  cfg.seed = root.uint("seed", cfg.seed);
  cfg.output = root.str("output", cfg.output);

  if (e == "quadrature") {
    FunctionSpec f_default;
    f_default.kind = FunctionSpec::Kind::preset;
    f_default.preset = "holder-lacunary";
    cfg.f = f_default;
    if (root.has("quadrature")) {
      Reader q(root.raw("quadrature"), "quadrature");
      cfg.g = parse_function(q, "g", cfg.g, cfg.model.dim);
      cfg.f = parse_function(q, "f", cfg.f, cfg.model.dim);
      q.finish();
    }
  }
  if (e == "qx-stability") {
    if (root.has("qx")) {
      Reader q(root.raw("qx"), "qx");
      cfg.qx_n = q.uint("n", cfg.qx_n);
      cfg.delta0 = q.num("delta0", cfg.delta0);
      cfg.halvings = q.uint("halvings", cfg.halvings);
      cfg.gamma = q.num("gamma", cfg.gamma);
      q.finish();
    }
    require(cfg.qx_n >= 1, "qx.n", "must be >= 1");
    require(cfg.delta0 >= 0.0, "qx.delta0", "must be >= 0 (0 selects n^{-1/2})");
    require(cfg.halvings >= 2, "qx.halvings", "at least 2 halvings are required");
    require(cfg.gamma >= 0.0 && cfg.gamma <= 1.0, "qx.gamma", "must lie in [0, 1]");
    if (cfg.delta0 == 0.0) cfg.delta0 = default_delta(cfg.qx_n);
    if (cfg.gamma == 0.0) cfg.gamma = (1.0 + std::min(model.drift.alpha(), 1.0)) / 2.0 - 0.05;
  }
  auto parse_pde = [&cfg](Reader& r) {
    cfg.half_width = r.num("half_width", cfg.half_width);
    require(cfg.half_width > 0.0, r.field("half_width"), "must be positive");
    cfg.pde.nx = r.uint("nx", cfg.pde.nx);
    cfg.pde.nt = r.uint("nt", cfg.pde.nt);
    require(cfg.pde.nx >= 3, r.field("nx"), "must be >= 3");
    require(cfg.pde.nt >= 2, r.field("nt"), "must be >= 2");
  };
  if (e == "clt-holder" || e == "clt-sobolev") {
    if (root.has("clt")) {
      Reader c(root.raw("clt"), "clt");
      cfg.times = c.nums("times", cfg.times);
      cfg.limit_n = c.uint("limit_n", cfg.limit_n);
      cfg.limit_paths = c.uint("limit_paths", cfg.limit_paths);
      cfg.delta_scale = c.num("delta_scale", cfg.delta_scale);
      cfg.bootstrap = c.uint("bootstrap", cfg.bootstrap);
      cfg.floor_splits = c.uint("floor_splits", cfg.floor_splits);
      if (e == "clt-sobolev") {
        cfg.theta = c.num("theta", cfg.theta);
        cfg.cross_check = c.boolean("cross_check", cfg.cross_check);
        parse_pde(c);
      }
      c.finish();
    }
    if (cfg.limit_paths == 0) cfg.limit_paths = cfg.n_paths;
    require(cfg.n_paths >= 1000, "n_paths", "at least 1000 paths are required");
    require(cfg.limit_paths >= 1000, "clt.limit_paths", "at least 1000 paths are required");
    require(!cfg.times.empty(), "clt.times", "at least one evaluation time is required");
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
      require(cfg.times[i] > 0.0 && cfg.times[i] <= 1.0, "clt.times[" + std::to_string(i) + "]",
              "must lie in (0, 1]");
    }
    require(cfg.limit_n >= 1, "clt.limit_n", "must be >= 1");
    require(cfg.delta_scale > 0.0, "clt.delta_scale", "must be positive");
    require(cfg.bootstrap >= 2, "clt.bootstrap", "must be >= 2");
    require(cfg.floor_splits >= 1, "clt.floor_splits", "must be >= 1");
    require(cfg.theta > 0.0, "clt.theta", "must be positive");
    if (e == "clt-sobolev") require(cfg.model.dim == 1, "model.dim", "clt-sobolev requires d = 1");
  }
  if (e == "zvonkin-sweep") {
    cfg.thetas = {4.0, 16.0, 64.0, 256.0};
    if (root.has("zvonkin")) {
      Reader z(root.raw("zvonkin"), "zvonkin");
      cfg.thetas = z.nums("thetas", cfg.thetas);
      parse_pde(z);
      z.finish();
    }
    require(!cfg.thetas.empty(), "zvonkin.thetas", "at least one theta is required");
    for (std::size_t i = 0; i < cfg.thetas.size(); ++i) {
      require(cfg.thetas[i] > 0.0, "zvonkin.thetas[" + std::to_string(i) + "]", "must be positive");
      if (i > 0) require(cfg.thetas[i] > cfg.thetas[i - 1], "zvonkin.thetas", "thetas must be increasing");
    }
    require(cfg.model.dim == 1, "model.dim", "zvonkin-sweep requires d = 1");
  }
  if (e == "area-check") {
    cfg.model.dim = std::max<std::size_t>(cfg.model.dim, 1);
    if (root.has("area")) {
      Reader a(root.raw("area"), "area");
      cfg.area_n = a.uint("n", cfg.area_n);
      cfg.refinements = a.uints("Ms", cfg.refinements);
      a.finish();
    }
    require(cfg.area_n >= 1, "area.n", "must be >= 1");
    require(!cfg.refinements.empty(), "area.Ms", "at least one refinement is required");
    require_increasing(cfg.refinements, "area.Ms", "Ms");
  }

  json checks = default_checks(cfg, model);
  if (root.has("check")) {
    const json& over = root.raw("check");
    if (!over.is_object()) throw ConfigError("check", "expected an object");
    for (const auto& [k, v] : over.items()) {
      if (!checks.contains(k)) throw ConfigError("check." + k, "unknown threshold for " + e);
      const json& def = checks.at(k);
      const bool ok = v.is_null() || (def.is_boolean() ? v.is_boolean() : v.is_number());
      if (!ok) throw ConfigError("check." + k, "wrong type");
      checks[k] = v;
    }
  }
  cfg.check = checks;
  root.finish();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  json model;
  model["drift"] = cfg.model.drift;
  model["drift_params"] = json(cfg.model.drift_params);
  model["diffusion"] = cfg.model.diffusion;
  model["diffusion_params"] = json(cfg.model.diffusion_params);
  model["dim"] = cfg.model.dim;
  model["x0"] = cfg.model.x0;
  model["lambda"] = cfg.model.lambda ? json(*cfg.model.lambda) : json(nullptr);
  j["model"] = model;
  j["ns"] = cfg.ns;
  j["M"] = cfg.refinement;
  j["n_paths"] = cfg.n_paths;
  j["p"] = cfg.p;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  const std::string& e = cfg.experiment;
  if (e == "quadrature") j["quadrature"] = {{"g", function_json(cfg.g)}, {"f", function_json(cfg.f)}};
  if (e == "qx-stability") {
    j["qx"] = {{"n", cfg.qx_n}, {"delta0", cfg.delta0}, {"halvings", cfg.halvings},
               {"gamma", cfg.gamma}};
  }
  if (e == "clt-holder" || e == "clt-sobolev") {
    json c = {{"times", cfg.times},         {"limit_n", cfg.limit_n},
              {"limit_paths", cfg.limit_paths}, {"delta_scale", cfg.delta_scale},
              {"bootstrap", cfg.bootstrap}, {"floor_splits", cfg.floor_splits}};
    if (e == "clt-sobolev") {
      c["theta"] = cfg.theta;
      c["cross_check"] = cfg.cross_check;
      c["half_width"] = cfg.half_width;
      c["nx"] = cfg.pde.nx;
      c["nt"] = cfg.pde.nt;
    }
    j["clt"] = c;
  }
  if (e == "zvonkin-sweep") {
    j["zvonkin"] = {{"thetas", cfg.thetas}, {"half_width", cfg.half_width}, {"nx", cfg.pde.nx},
                    {"nt", cfg.pde.nt}};
  }
  if (e == "area-check") j["area"] = {{"n", cfg.area_n}, {"Ms", cfg.refinements}};
  j["check"] = cfg.check;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output");
  return sha256_hex(j.dump());
}

}  // namespace emclt::cli
