#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gnull::features {

// Design-matrix columns are built from history-referencing terms. A term is
// evaluated at a time t: for the covariate model t is the time of the
// response l_t and terms may reference history through t-1; for the outcome
// model t = K and terms may reference the full history.
enum class TermKind {
  intercept,
  treatment_lag,          // a_{t-lag}
  treatment_cumsum,       // sum of a_i for i in [from_time, t+to_offset]
  covariate_lag,          // l_{t-lag}
  covariate_cumsum,       // sum of l_i for i in [from_time, t+to_offset]
  covariate_cumavg,       // mean of l_i over [from_time, t+to_offset]
  unmeasured_u,           // the individual's u
  treatment_lag_times_u,  // a_{t-lag} * u
};

struct Term {
  TermKind kind = TermKind::intercept;
  int lag = 0;        // lag kinds
  int from_time = 0;  // cumulative kinds: first summed time (absolute)
  int to_offset = 0;  // cumulative kinds: last summed time is t + to_offset

  static Term intercept() { return {TermKind::intercept, 0, 0, 0}; }
  static Term treatment_lag(int lag) {
    return {TermKind::treatment_lag, lag, 0, 0};
  }
  static Term treatment_cumsum(int from_time, int to_offset) {
    return {TermKind::treatment_cumsum, 0, from_time, to_offset};
  }
  static Term covariate_lag(int lag) {
    return {TermKind::covariate_lag, lag, 0, 0};
  }
  static Term covariate_cumsum(int from_time, int to_offset) {
    return {TermKind::covariate_cumsum, 0, from_time, to_offset};
  }
  static Term covariate_cumavg(int from_time, int to_offset) {
    return {TermKind::covariate_cumavg, 0, from_time, to_offset};
  }
  static Term unmeasured_u() { return {TermKind::unmeasured_u, 0, 0, 0}; }
  static Term treatment_lag_times_u(int lag) {
    return {TermKind::treatment_lag_times_u, lag, 0, 0};
  }

  bool operator==(const Term&) const = default;
};

// The four built-in model flexibilities, ordered from the coarsest history
// summary to a specification that conditions on u itself.
enum class Level { least, moderate, most, benchmark, custom };

const char* level_name(Level level);
std::optional<Level> level_from_name(const std::string& name);

struct ModelSpec {
  Level level = Level::custom;
  std::string label = "custom";
  std::vector<Term> covariate_terms;
  std::vector<Term> outcome_terms;

  bool uses_u() const;
};

// Term lists for one built-in flexibility at horizon K. Cumulative terms
// whose summation range is empty at every time the model is evaluated are
// dropped (the treatment running sum vanishes from the outcome model at
// K = 1).
ModelSpec builtin_spec(Level level, int K);

// One individual's history as contiguous spans: l covers times
// -prebaseline..(l.size()-prebaseline-1), a covers times 0..(a.size()-1).
struct HistoryView {
  std::span<const double> l;
  std::span<const double> a;
  std::optional<double> u;
  int prebaseline = 9;
};

// Evaluation context carrying running prefix sums so cumulative terms cost
// O(1). l_prefix and a_prefix hold one more entry than the value spans:
// l_prefix[j] is the sum of the first j covariate values, likewise a_prefix.
// max_l_time / max_a_time bound which times terms may reference.
struct TermContext {
  std::span<const double> l;
  std::span<const double> a;
  std::span<const double> l_prefix;
  std::span<const double> a_prefix;
  std::optional<double> u;
  int prebaseline = 9;
  int max_l_time = 0;
  int max_a_time = 0;
};

// Throws errc::missing_history when a term reaches outside the allowed
// history and errc::missing_u when a term needs u and the context has none.
double eval_term(const Term& term, int t, const TermContext& ctx);

void build_row(std::vector<double>& out, std::span<const Term> terms, int t,
               const TermContext& ctx);

// Design row for the covariate model of l_k; history through k-1 only.
std::vector<double> covariate_row(const HistoryView& h, int k,
                                  const ModelSpec& spec);

// Design row for the outcome model at the final time K.
std::vector<double> outcome_row(const HistoryView& h, int K,
                                const ModelSpec& spec);

}  // namespace gnull::features
