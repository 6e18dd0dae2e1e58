#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "gnull/rng.hpp"

namespace gnull::datagen {

enum class TreatmentKind { binary, continuous };

struct ContinuousTreatmentParams {
  // Mean of the dose at time k is
  //   intercept + lag_slope*a_{k-1} + covariate_slope*l_k + interaction*a_{k-1}*l_k,
  // with normal noise truncated to [lower, upper].
  double intercept = 80.0;
  double lag_slope = 0.1;
  double covariate_slope = 30.0;
  double interaction = -0.05;
  double sd = 25.0;
  double lower = 0.0;
  double upper = 200.0;
};

struct BinaryTreatmentParams {
  // Logit of treatment at time k on (1, a_{k-1}, l_k, a_{k-1}*l_k).
  std::array<double, 4> logit{-1.25, 1.0, 1.0, 1.0};
};

struct DgpConfig {
  TreatmentKind treatment_kind = TreatmentKind::continuous;
  int K = 1;                // final time index; outcome measured at K
  std::size_t n = 1000;     // individuals per dataset
  std::uint64_t master_seed = 0;
  int n_prebaseline = 9;    // covariate history carried before time 0

  // Logit of the binary covariate at time k on (1, a_{k-1}, u, a_{k-1}*u).
  // Before time 1 the prior treatment is fixed at 0.
  std::array<double, 4> alpha{1.0, -0.015, 1.0, 0.015};

  ContinuousTreatmentParams continuous;
  BinaryTreatmentParams binary;

  // Outcome is normal with mean outcome_intercept + outcome_u_slope * u,
  // truncated to [outcome_lower, outcome_upper]. Treatments and covariates
  // never enter, so every static intervention shares one outcome law.
  double outcome_intercept = 350.0;
  double outcome_u_slope = 300.0;
  double outcome_sd = 50.0;
  double outcome_lower = 0.0;
  double outcome_upper = 1000.0;

  static DgpConfig continuous_defaults(int K, std::size_t n,
                                       std::uint64_t master_seed);
  static DgpConfig binary_defaults(int K, std::size_t n,
                                   std::uint64_t master_seed);

  void validate() const;  // throws errc::invalid_argument
};

struct Trajectory {
  std::int64_t id = 0;
  std::optional<double> u;  // absent when loaded from CSV
  std::vector<double> l;    // times -n_prebaseline..K, values 0/1
  std::vector<double> a;    // times 0..K
  double y = 0.0;

  int K() const { return static_cast<int>(a.size()) - 1; }
  int prebaseline() const {
    return static_cast<int>(l.size()) - static_cast<int>(a.size());
  }
  // Covariate at a signed time index.
  double l_at(int time) const {
    return l[static_cast<std::size_t>(time + prebaseline())];
  }
};

using Dataset = std::vector<Trajectory>;

// Normal(mu, sigma^2) conditioned on [lower, upper]. Draws by rejection while
// the acceptance probability is at least 1%, otherwise by inverting the CDF
// on the truncated range. Every returned value lies inside the bounds.
double sample_truncated_normal(double mu, double sigma, double lower,
                               double upper, Rng& rng);

// One full trajectory: u, covariate history from -n_prebaseline..K,
// treatments 0..K, outcome at K. stream_key identifies the individual's
// private random substream; u, covariates, treatments and outcome each draw
// from separate children of it, so changing one process parameter never
// perturbs the draws of the others.
Trajectory generate_individual(const DgpConfig& cfg, std::int64_t id,
                               std::uint64_t stream_key);

// Dataset for one simulation replicate. Identical (cfg, replicate_index)
// yield identical datasets; distinct replicate indices are independent.
Dataset generate_dataset(const DgpConfig& cfg, std::uint64_t replicate_index);

// Long-format CSV. Header is id,time,L,A,Y (plus a trailing U column when
// include_u is set); one row per (id,time) with time ascending from
// -n_prebaseline to K; A is empty before time 0; Y appears only at time K.
void write_csv(std::ostream& os, const Dataset& data, bool include_u = false);
void write_csv_file(const std::filesystem::path& path, const Dataset& data,
                    bool include_u = false);

// Inverse of write_csv. Throws errc::invalid_argument naming the offending
// row on any schema violation.
Dataset read_csv(std::istream& is);
Dataset read_csv_file(const std::filesystem::path& path);

}  // namespace gnull::datagen
