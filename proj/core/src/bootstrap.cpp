#include "gnull/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gnull/error.hpp"
#include "gnull/parallel.hpp"
#include "gnull/rng.hpp"

namespace gnull::bootstrap {

double interpolated_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error(errc::invalid_argument, "quantile of an empty sample");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(errc::invalid_argument, "quantile level must be in [0, 1]");
  }
  const std::size_t m = sorted.size();
  const double h = static_cast<double>(m - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= m || frac == 0.0) return sorted[std::min(lo, m - 1)];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

CiResult make_ci(double point, std::vector<double>& draws, double level) {
  std::sort(draws.begin(), draws.end());
  const double alpha = 1.0 - level;
  CiResult ci;
  ci.point = point;
  ci.level = level;
  ci.n_replicates = static_cast<int>(draws.size());
  ci.lower = interpolated_quantile(draws, alpha / 2.0);
  ci.upper = interpolated_quantile(draws, 1.0 - alpha / 2.0);
  return ci;
}

}  // namespace

BootstrapResult bootstrap_gformula(
    const datagen::Dataset& data, const features::ModelSpec& spec, int K,
    const std::pair<gformula::Intervention, gformula::Intervention>&
        interventions,
    const gformula::EstimateConfig& est_cfg, std::size_t B, double level,
    std::uint64_t seed, unsigned threads) {
  if (B == 0) {
    throw Error(errc::invalid_argument,
                "bootstrap needs at least one replicate");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(errc::invalid_argument,
                "confidence level must be in (0, 1)");
  }

  const gformula::GFormulaResult point =
      gformula::estimate_effect(data, spec, K, interventions, est_cfg);

  const std::size_t n = data.size();
  std::vector<double> first(B), second(B), diff(B);
  std::vector<char> ok(B, 0);

  const unsigned workers = effective_threads(threads);
  parallel_chunks(B, workers, [&](std::size_t begin,
                                            std::size_t end) {
    datagen::Dataset resampled;
    resampled.reserve(n);
    for (std::size_t b = begin; b < end; ++b) {
      const std::uint64_t rep_seed =
          derive_seed(seed, {stream::bootstrap_rep, b});
      Rng pick(derive_seed(rep_seed, {stream::individual}));
      resampled.clear();
      for (std::size_t j = 0; j < n; ++j) {
        resampled.push_back(data[pick.uniform_index(n)]);
      }
      gformula::EstimateConfig inner = est_cfg;
      inner.seed = derive_seed(rep_seed, {stream::mc_unit});
      inner.threads = 1;  // parallelism lives across replicates
      try {
        const gformula::GFormulaResult r = gformula::estimate_effect(
            resampled, spec, K, interventions, inner);
        first[b] = r.means[0];
        second[b] = r.means[1];
        diff[b] = r.difference;
        ok[b] = 1;
      } catch (const Error&) {
        ok[b] = 0;  // degenerate resample (separation, rank loss); skip it
      }
    }
  });

  std::vector<double> fs, ss, ds;
  fs.reserve(B);
  ss.reserve(B);
  ds.reserve(B);
  std::size_t n_failed = 0;
  for (std::size_t b = 0; b < B; ++b) {
    if (ok[b]) {
      fs.push_back(first[b]);
      ss.push_back(second[b]);
      ds.push_back(diff[b]);
    } else {
      ++n_failed;
    }
  }
  if (n_failed * 10 > B) {
    throw Error(errc::bootstrap_unstable,
                "bootstrap unstable: " + std::to_string(n_failed) + " of " +
                    std::to_string(B) + " replicates failed to refit");
  }

  BootstrapResult out;
  out.B = B;
  out.n_failed = n_failed;
  out.mean_first = make_ci(point.means[0], fs, level);
  out.mean_second = make_ci(point.means[1], ss, level);
  out.difference = make_ci(point.difference, ds, level);
  return out;
}

}  // namespace gnull::bootstrap
