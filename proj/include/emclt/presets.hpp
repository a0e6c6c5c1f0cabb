#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emclt/model.hpp"

namespace emclt {

using PresetParams = std::map<std::string, double>;

/// Named drift coefficients:
///   zero, constant(c), linear(a), smooth-tanh, holder-lacunary(alpha, K),
///   sobolev-bump(alpha, m, amplitude, radius).
Drift make_drift(const std::string& name, const PresetParams& params, std::size_t dim);

/// Named diffusion coefficients: identity, constant(s), sin-modulated(amp).
/// Returns the ellipticity constant of the preset through `lambda`.
Diffusion make_diffusion(const std::string& name, const PresetParams& params, std::size_t dim,
                         double& lambda);

struct ModelChoice {
  std::string drift = "smooth-tanh";
  PresetParams drift_params;
  std::string diffusion = "sin-modulated";
  PresetParams diffusion_params;
  std::size_t dim = 1;
  std::vector<double> x0;             // defaults to the origin
  std::optional<double> lambda;       // defaults to the preset's constant
};

/// Builds and validates a model from presets.
ModelSpec make_model(const ModelChoice& choice);

bool is_drift_preset(const std::string& name);
bool is_diffusion_preset(const std::string& name);

/// Human-readable listing of all presets with their regularity metadata.
std::string list_presets();

}  // namespace emclt
