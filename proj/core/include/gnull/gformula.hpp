#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gnull/datagen.hpp"
#include "gnull/features.hpp"
#include "gnull/glm.hpp"

namespace gnull::gformula {

// A deterministic treatment plan: dose[k] is assigned at time k.
struct Intervention {
  std::string label;
  std::vector<double> dose;
};

// The constant plan "assign value at every time 0..K".
Intervention static_intervention(std::string label, double value, int K);

enum class Mode { mc, enumerate_paths };

struct EstimateConfig {
  std::size_t n_simul = 0;  // 0 -> one simulation unit per observed baseline
  Mode mode = Mode::mc;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// Covariate history through time 0, plus u when the dataset carries it.
// Baselines are always taken from the data, never simulated.
struct Baseline {
  std::vector<double> l;  // times -prebaseline..0
  std::optional<double> u;
};

struct FittedNuisance {
  features::ModelSpec spec;
  int K = 0;
  int prebaseline = 9;
  glm::FitResult covariate_model;  // logistic; pooled over times 1..K
  glm::FitResult outcome_model;    // linear; fit at time K
  std::vector<Baseline> baselines;
};

// Fits both nuisance models on the dataset. Fit failures surface as
// structured errors naming the failing model.
FittedNuisance fit_nuisance(const datagen::Dataset& data,
                            const features::ModelSpec& spec, int K);

// Plug-in counterfactual outcome mean under the intervention, by forward
// simulation of covariate paths from the fitted covariate model. Unit i
// draws from a substream keyed by (seed, i), so two calls with one seed see
// identical path uniforms (common random numbers across interventions) and
// the result does not depend on threads.
double mc_counterfactual_mean(const FittedNuisance& fit,
                              const Intervention& intervention,
                              std::size_t n_simul, std::uint64_t seed,
                              unsigned threads = 1);

// Exact version of the same plug-in mean: sums over all 2^K covariate paths
// per baseline, weighting each by its model probability. Requires binary
// covariates and K <= 20.
double enumerate_counterfactual_mean(const FittedNuisance& fit,
                                     const Intervention& intervention);

struct GFormulaResult {
  std::array<std::string, 2> labels;
  std::array<double, 2> means{0.0, 0.0};
  double difference = 0.0;  // means[1] - means[0]
};

// Fits once, then evaluates both interventions on the shared fit (and, in MC
// mode, on shared path uniforms).
GFormulaResult estimate_effect(
    const datagen::Dataset& data, const features::ModelSpec& spec, int K,
    const std::pair<Intervention, Intervention>& interventions,
    const EstimateConfig& cfg);

}  // namespace gnull::gformula
