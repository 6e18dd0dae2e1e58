#include "gnull/features.hpp"

#include <string>

#include "gnull/error.hpp"

namespace gnull::features {

const char* level_name(Level level) {
  switch (level) {
    case Level::least: return "least";
    case Level::moderate: return "moderate";
    case Level::most: return "most";
    case Level::benchmark: return "benchmark";
    case Level::custom: return "custom";
  }
  return "custom";
}

std::optional<Level> level_from_name(const std::string& name) {
  if (name == "least") return Level::least;
  if (name == "moderate") return Level::moderate;
  if (name == "most") return Level::most;
  if (name == "benchmark") return Level::benchmark;
  if (name == "custom") return Level::custom;
  return std::nullopt;
}

bool ModelSpec::uses_u() const {
  auto scans = [](const std::vector<Term>& terms) {
    for (const auto& t : terms) {
      if (t.kind == TermKind::unmeasured_u ||
          t.kind == TermKind::treatment_lag_times_u) {
        return true;
      }
    }
    return false;
  };
  return scans(covariate_terms) || scans(outcome_terms);
}

ModelSpec builtin_spec(Level level, int K) {
  if (K < 1) {
    throw Error(errc::invalid_argument, "builtin_spec requires K >= 1");
  }
  if (level == Level::custom) {
    throw Error(errc::invalid_argument,
                "custom specs carry their own term lists");
  }
  ModelSpec spec;
  spec.level = level;
  spec.label = level_name(level);

  auto outcome_head = [&] {
    spec.outcome_terms.push_back(Term::intercept());
    if (level == Level::benchmark) {
      spec.outcome_terms.push_back(Term::unmeasured_u());
    }
    spec.outcome_terms.push_back(Term::treatment_lag(0));
    spec.outcome_terms.push_back(Term::treatment_lag(1));
    if (K >= 2) {
      // Running sum of doses before K-1; the range 0..K-2 is empty at K = 1.
      spec.outcome_terms.push_back(Term::treatment_cumsum(0, -2));
    }
  };

  switch (level) {
    case Level::least:
      spec.covariate_terms = {Term::intercept(), Term::treatment_lag(1),
                              Term::covariate_cumavg(-9, -1)};
      outcome_head();
      spec.outcome_terms.push_back(Term::covariate_cumsum(-9, 0));
      break;
    case Level::moderate:
      spec.covariate_terms = {Term::intercept(), Term::treatment_lag(1),
                              Term::covariate_lag(1), Term::covariate_lag(2),
                              Term::covariate_cumavg(-9, -3)};
      outcome_head();
      spec.outcome_terms.push_back(Term::covariate_lag(0));
      spec.outcome_terms.push_back(Term::covariate_lag(1));
      spec.outcome_terms.push_back(Term::covariate_lag(2));
      spec.outcome_terms.push_back(Term::covariate_cumsum(-9, -3));
      break;
    case Level::most:
      spec.covariate_terms = {Term::intercept(), Term::treatment_lag(1)};
      for (int lag = 1; lag <= 10; ++lag) {
        spec.covariate_terms.push_back(Term::covariate_lag(lag));
      }
      outcome_head();
      for (int lag = 0; lag <= 10; ++lag) {
        spec.outcome_terms.push_back(Term::covariate_lag(lag));
      }
      break;
    case Level::benchmark:
      spec.covariate_terms = {Term::intercept(), Term::treatment_lag(1),
                              Term::unmeasured_u(),
                              Term::treatment_lag_times_u(1)};
      outcome_head();
      break;
    case Level::custom:
      break;
  }
  return spec;
}

namespace {

[[noreturn]] void out_of_history(const char* what, int time) {
  throw Error(errc::missing_history,
              std::string(what) + " at time " + std::to_string(time) +
                  " is outside the available history");
}

double need_u(const TermContext& ctx) {
  if (!ctx.u.has_value()) {
    throw Error(errc::missing_u,
                "model term references u but the dataset has no u");
  }
  return *ctx.u;
}

double covariate_at(const TermContext& ctx, int time) {
  if (time < -ctx.prebaseline || time > ctx.max_l_time) {
    out_of_history("covariate", time);
  }
  return ctx.l[static_cast<std::size_t>(time + ctx.prebaseline)];
}

double treatment_at(const TermContext& ctx, int time) {
  if (time < 0 || time > ctx.max_a_time) {
    out_of_history("treatment", time);
  }
  return ctx.a[static_cast<std::size_t>(time)];
}

// Sum of values over signed times [from, to] via the prefix array; base is
// the signed time of index 0.
double range_sum(std::span<const double> prefix, int base, int from, int to) {
  return prefix[static_cast<std::size_t>(to - base + 1)] -
         prefix[static_cast<std::size_t>(from - base)];
}

}  // namespace

double eval_term(const Term& term, int t, const TermContext& ctx) {
  switch (term.kind) {
    case TermKind::intercept:
      return 1.0;
    case TermKind::treatment_lag:
      return treatment_at(ctx, t - term.lag);
    case TermKind::treatment_cumsum: {
      const int to = t + term.to_offset;
      if (term.from_time > to) {
        return 0.0;  // empty range
      }
      if (term.from_time < 0) {
        out_of_history("treatment", term.from_time);
      }
      if (to > ctx.max_a_time) {
        out_of_history("treatment", to);
      }
      return range_sum(ctx.a_prefix, 0, term.from_time, to);
    }
    case TermKind::covariate_lag:
      return covariate_at(ctx, t - term.lag);
    case TermKind::covariate_cumsum: {
      const int to = t + term.to_offset;
      if (term.from_time > to) {
        return 0.0;
      }
      if (term.from_time < -ctx.prebaseline) {
        out_of_history("covariate", term.from_time);
      }
      if (to > ctx.max_l_time) {
        out_of_history("covariate", to);
      }
      return range_sum(ctx.l_prefix, -ctx.prebaseline, term.from_time, to);
    }
    case TermKind::covariate_cumavg: {
      const int to = t + term.to_offset;
      const int count = to - term.from_time + 1;
      if (count <= 0) {
        throw Error(errc::invalid_argument,
                    "covariate running average over an empty range");
      }
      if (term.from_time < -ctx.prebaseline) {
        out_of_history("covariate", term.from_time);
      }
      if (to > ctx.max_l_time) {
        out_of_history("covariate", to);
      }
      return range_sum(ctx.l_prefix, -ctx.prebaseline, term.from_time, to) /
             static_cast<double>(count);
    }
    case TermKind::unmeasured_u:
      return need_u(ctx);
    case TermKind::treatment_lag_times_u:
      return treatment_at(ctx, t - term.lag) * need_u(ctx);
  }
  throw Error(errc::invalid_argument, "unknown term kind");
}

void build_row(std::vector<double>& out, std::span<const Term> terms, int t,
               const TermContext& ctx) {
  out.clear();
  out.reserve(terms.size());
  for (const auto& term : terms) {
    out.push_back(eval_term(term, t, ctx));
  }
}

namespace {

std::vector<double> prefix_of(std::span<const double> values) {
  std::vector<double> prefix(values.size() + 1, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    prefix[i + 1] = prefix[i] + values[i];
  }
  return prefix;
}

std::vector<double> row_at(const HistoryView& h, std::span<const Term> terms,
                           int t, int max_l_time, int max_a_time) {
  const auto l_prefix = prefix_of(h.l);
  const auto a_prefix = prefix_of(h.a);
  TermContext ctx{h.l,  h.a,          l_prefix,   a_prefix,
                  h.u,  h.prebaseline, max_l_time, max_a_time};
  std::vector<double> out;
  build_row(out, terms, t, ctx);
  return out;
}

}  // namespace

std::vector<double> covariate_row(const HistoryView& h, int k,
                                  const ModelSpec& spec) {
  if (k < 1) {
    throw Error(errc::invalid_argument,
                "covariate model rows exist for times 1..K");
  }
  return row_at(h, spec.covariate_terms, k, k - 1, k - 1);
}

std::vector<double> outcome_row(const HistoryView& h, int K,
                                const ModelSpec& spec) {
  if (K < 0) {
    throw Error(errc::invalid_argument, "outcome time must be nonnegative");
  }
  return row_at(h, spec.outcome_terms, K, K, K);
}

}  // namespace gnull::features
