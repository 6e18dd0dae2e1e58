#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "gnull/datagen.hpp"
#include "gnull/features.hpp"
#include "gnull/gformula.hpp"

namespace gnull::bootstrap {

struct CiResult {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  int n_replicates = 0;  // successful replicates behind the interval
};

// Quantile with linear interpolation between order statistics: at q the
// value sits h = (m-1)q order statistics in, interpolating the fractional
// part. sorted must be ascending and nonempty; q in [0, 1].
double interpolated_quantile(std::span<const double> sorted, double q);

struct BootstrapResult {
  CiResult mean_first;   // mean under interventions.first
  CiResult mean_second;  // mean under interventions.second
  CiResult difference;
  std::size_t n_failed = 0;
  std::size_t B = 0;
};

// Nonparametric bootstrap over individuals: B resamples of size n with
// replacement, a full refit and re-estimation on each, and percentile
// intervals from the replicate estimates. Point estimates come from the
// original data. Replicates whose refit fails are skipped; if more than 10%
// fail the whole call fails with errc::bootstrap_unstable. Replicate b draws
// from a substream keyed by (seed, b), so results are independent of worker
// count.
BootstrapResult bootstrap_gformula(
    const datagen::Dataset& data, const features::ModelSpec& spec, int K,
    const std::pair<gformula::Intervention, gformula::Intervention>&
        interventions,
    const gformula::EstimateConfig& est_cfg, std::size_t B, double level,
    std::uint64_t seed, unsigned threads = 1);

}  // namespace gnull::bootstrap
