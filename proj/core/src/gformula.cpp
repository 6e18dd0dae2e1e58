#include "gnull/gformula.hpp"

#include <cmath>
#include <utility>

#include "gnull/error.hpp"
#include "gnull/parallel.hpp"
#include "gnull/rng.hpp"

namespace gnull::gformula {

Intervention static_intervention(std::string label, double value, int K) {
  if (K < 0) {
    throw Error(errc::invalid_argument, "intervention horizon must be >= 0");
  }
  return {std::move(label),
          std::vector<double>(static_cast<std::size_t>(K + 1), value)};
}

namespace {

int validate_dataset(const datagen::Dataset& data,
                     const features::ModelSpec& spec, int K) {
  if (data.empty()) {
    throw Error(errc::invalid_argument, "empty dataset");
  }
  if (K < 1) {
    throw Error(errc::invalid_argument, "K must be at least 1");
  }
  if (spec.covariate_terms.empty() || spec.outcome_terms.empty()) {
    throw Error(errc::invalid_argument,
                "model spec needs covariate and outcome terms");
  }
  const int P = data.front().prebaseline();
  for (const auto& t : data) {
    if (t.K() != K) {
      throw Error(errc::invalid_argument,
                  "dataset horizon does not match K");
    }
    if (t.prebaseline() != P) {
      throw Error(errc::invalid_argument,
                  "prebaseline history length differs across individuals");
    }
  }
  if (spec.uses_u()) {
    for (const auto& t : data) {
      if (!t.u.has_value()) {
        throw Error(errc::missing_u,
                    "model spec references u but the dataset has no u");
      }
    }
  }
  return P;
}

void validate_intervention(const Intervention& intervention, int K) {
  if (intervention.dose.size() != static_cast<std::size_t>(K + 1)) {
    throw Error(errc::invalid_argument,
                "intervention must assign a dose at every time 0..K");
  }
  for (double d : intervention.dose) {
    if (!std::isfinite(d)) {
      throw Error(errc::invalid_argument, "non-finite intervention dose");
    }
  }
}

std::vector<double> prefix_of(std::span<const double> values) {
  std::vector<double> prefix(values.size() + 1, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    prefix[i + 1] = prefix[i] + values[i];
  }
  return prefix;
}

}  // namespace

FittedNuisance fit_nuisance(const datagen::Dataset& data,
                            const features::ModelSpec& spec, int K) {
  const int P = validate_dataset(data, spec, K);
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto pc = static_cast<Eigen::Index>(spec.covariate_terms.size());
  const auto po = static_cast<Eigen::Index>(spec.outcome_terms.size());

  Eigen::MatrixXd Xc(n * K, pc);
  Eigen::VectorXd yc(n * K);
  Eigen::MatrixXd Xo(n, po);
  Eigen::VectorXd yo(n);

  std::vector<double> row;
  Eigen::Index rc = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& traj = data[static_cast<std::size_t>(i)];
    const auto l_prefix = prefix_of(traj.l);
    const auto a_prefix = prefix_of(traj.a);
    features::TermContext ctx{traj.l, traj.a, l_prefix, a_prefix,
                              traj.u,  P,      0,        0};
    for (int k = 1; k <= K; ++k) {
      ctx.max_l_time = k - 1;
      ctx.max_a_time = k - 1;
      features::build_row(row, spec.covariate_terms, k, ctx);
      for (Eigen::Index j = 0; j < pc; ++j) {
        Xc(rc, j) = row[static_cast<std::size_t>(j)];
      }
      yc(rc) = traj.l_at(k);
      ++rc;
    }
    ctx.max_l_time = K;
    ctx.max_a_time = K;
    features::build_row(row, spec.outcome_terms, K, ctx);
    for (Eigen::Index j = 0; j < po; ++j) {
      Xo(i, j) = row[static_cast<std::size_t>(j)];
    }
    yo(i) = traj.y;
  }

  FittedNuisance fit;
  fit.spec = spec;
  fit.K = K;
  fit.prebaseline = P;
  try {
    fit.covariate_model = glm::fit_logistic(Xc, yc);
  } catch (const Error& e) {
    throw Error(e.code(),
                "covariate model (" + spec.label + "): " + e.what());
  }
  try {
    fit.outcome_model = glm::fit_linear(Xo, yo);
  } catch (const Error& e) {
    throw Error(e.code(), "outcome model (" + spec.label + "): " + e.what());
  }

  fit.baselines.reserve(data.size());
  for (const auto& traj : data) {
    Baseline b;
    b.l.assign(traj.l.begin(), traj.l.begin() + P + 1);
    b.u = traj.u;
    fit.baselines.push_back(std::move(b));
  }
  return fit;
}

double mc_counterfactual_mean(const FittedNuisance& fit,
                              const Intervention& intervention,
                              std::size_t n_simul, std::uint64_t seed,
                              unsigned threads) {
  validate_intervention(intervention, fit.K);
  if (fit.baselines.empty()) {
    throw Error(errc::invalid_argument, "fit carries no baselines");
  }
  if (n_simul == 0) {
    throw Error(errc::invalid_argument, "n_simul must be positive");
  }
  const int K = fit.K;
  const int P = fit.prebaseline;
  const std::size_t nb = fit.baselines.size();
  const auto a_prefix = prefix_of(intervention.dose);
  std::vector<double> values(n_simul);

  parallel_chunks(n_simul, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> l(static_cast<std::size_t>(P + K + 1), 0.0);
    std::vector<double> l_prefix(l.size() + 1, 0.0);
    std::vector<double> row;
    for (std::size_t i = begin; i < end; ++i) {
      const Baseline& base = fit.baselines[i % nb];
      for (int j = 0; j <= P; ++j) {
        l[static_cast<std::size_t>(j)] = base.l[static_cast<std::size_t>(j)];
        l_prefix[static_cast<std::size_t>(j + 1)] =
            l_prefix[static_cast<std::size_t>(j)] +
            l[static_cast<std::size_t>(j)];
      }
      Rng rng(derive_seed(seed, {stream::mc_unit, i}));
      features::TermContext ctx{l,      intervention.dose, l_prefix, a_prefix,
                                base.u, P,                 0,        0};
      for (int k = 1; k <= K; ++k) {
        ctx.max_l_time = k - 1;
        ctx.max_a_time = k - 1;
        features::build_row(row, fit.spec.covariate_terms, k, ctx);
        const double p = glm::predict_mean(fit.covariate_model, row);
        const double lk = rng.uniform01() < p ? 1.0 : 0.0;
        l[static_cast<std::size_t>(P + k)] = lk;
        l_prefix[static_cast<std::size_t>(P + k + 1)] =
            l_prefix[static_cast<std::size_t>(P + k)] + lk;
      }
      ctx.max_l_time = K;
      ctx.max_a_time = K;
      features::build_row(row, fit.spec.outcome_terms, K, ctx);
      values[i] = glm::predict_mean(fit.outcome_model, row);
    }
  });

  double total = 0.0;
  for (double v : values) {
    total += v;
  }
  return total / static_cast<double>(n_simul);
}

double enumerate_counterfactual_mean(const FittedNuisance& fit,
                                     const Intervention& intervention) {
  validate_intervention(intervention, fit.K);
  if (fit.baselines.empty()) {
    throw Error(errc::invalid_argument, "fit carries no baselines");
  }
  const int K = fit.K;
  if (K > 20) {
    throw Error(errc::enumeration_infeasible,
                "enumeration infeasible: 2^" + std::to_string(K) +
                    " covariate paths");
  }
  const int P = fit.prebaseline;
  const auto a_prefix = prefix_of(intervention.dose);

  std::vector<double> l(static_cast<std::size_t>(P + K + 1), 0.0);
  std::vector<double> l_prefix(l.size() + 1, 0.0);
  std::vector<double> row;
  features::TermContext ctx{l,            intervention.dose,
                            l_prefix,     a_prefix,
                            std::nullopt, P,
                            0,            0};

  double grand_total = 0.0;
  for (const Baseline& base : fit.baselines) {
    for (int j = 0; j <= P; ++j) {
      l[static_cast<std::size_t>(j)] = base.l[static_cast<std::size_t>(j)];
      l_prefix[static_cast<std::size_t>(j + 1)] =
          l_prefix[static_cast<std::size_t>(j)] +
          l[static_cast<std::size_t>(j)];
    }
    ctx.u = base.u;
    double total = 0.0;
    double weight_sum = 0.0;
    // Depth-first walk over covariate paths; weights multiply along the way.
    auto walk = [&](auto&& self, int k, double weight) -> void {
      if (k > K) {
        ctx.max_l_time = K;
        ctx.max_a_time = K;
        features::build_row(row, fit.spec.outcome_terms, K, ctx);
        total += weight * glm::predict_mean(fit.outcome_model, row);
        weight_sum += weight;
        return;
      }
      ctx.max_l_time = k - 1;
      ctx.max_a_time = k - 1;
      features::build_row(row, fit.spec.covariate_terms, k, ctx);
      const double p = glm::predict_mean(fit.covariate_model, row);
      for (int bit = 0; bit <= 1; ++bit) {
        const double lk = bit ? 1.0 : 0.0;
        l[static_cast<std::size_t>(P + k)] = lk;
        l_prefix[static_cast<std::size_t>(P + k + 1)] =
            l_prefix[static_cast<std::size_t>(P + k)] + lk;
        self(self, k + 1, weight * (bit ? p : 1.0 - p));
      }
    };
    walk(walk, 1, 1.0);
    if (std::fabs(weight_sum - 1.0) > 1e-9) {
      throw Error(errc::invalid_argument,
                  "internal: covariate path probabilities do not sum to 1");
    }
    grand_total += total;
  }
  return grand_total / static_cast<double>(fit.baselines.size());
}

GFormulaResult estimate_effect(
    const datagen::Dataset& data, const features::ModelSpec& spec, int K,
    const std::pair<Intervention, Intervention>& interventions,
    const EstimateConfig& cfg) {
  const FittedNuisance fit = fit_nuisance(data, spec, K);
  const std::size_t n_simul =
      cfg.n_simul ? cfg.n_simul : fit.baselines.size();

  GFormulaResult result;
  result.labels = {interventions.first.label, interventions.second.label};
  if (cfg.mode == Mode::mc) {
    // One seed for both arms: the same path uniforms are reused under each
    // intervention, so dose effects are not diluted by simulation noise.
    result.means[0] = mc_counterfactual_mean(fit, interventions.first, n_simul,
                                             cfg.seed, cfg.threads);
    result.means[1] = mc_counterfactual_mean(fit, interventions.second,
                                             n_simul, cfg.seed, cfg.threads);
  } else {
    result.means[0] = enumerate_counterfactual_mean(fit, interventions.first);
    result.means[1] = enumerate_counterfactual_mean(fit, interventions.second);
  }
  result.difference = result.means[1] - result.means[0];
  return result;
}

}  // namespace gnull::gformula
