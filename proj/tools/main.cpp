// Command-line front end: dataset generation, single-dataset estimation,
// closed-form two-period analytics, and the full simulation study.
//
// Exit codes: 0 success, 1 usage/config/schema error, 2 runtime or
// statistical failure (non-convergence, unstable bootstrap, failed cells).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gnull/bootstrap.hpp"
#include "gnull/datagen.hpp"
#include "gnull/error.hpp"
#include "gnull/features.hpp"
#include "gnull/gformula.hpp"
#include "gnull/paradox.hpp"
#include "gnull/study.hpp"
#include "gnull/textio.hpp"
#include "gnull/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(gnull::errc code) {
  switch (code) {
    case gnull::errc::invalid_argument:
    case gnull::errc::io_error:
      return 1;
    default:
      return 2;
  }
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

json load_json_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw gnull::Error(gnull::errc::io_error,
                       "cannot read " + path.string());
  }
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       path.string() + ": " + e.what());
  }
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       where + " must be a JSON object");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": unknown key \"" + it.key() + "\"");
    }
  }
}

template <typename T>
T get_field(const json& obj, const std::string& where, const char* key,
            T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       where + ": field \"" + key + "\": " + e.what());
  }
}

gnull::datagen::TreatmentKind parse_kind(const std::string& name,
                                         const std::string& where) {
  if (name == "binary") return gnull::datagen::TreatmentKind::binary;
  if (name == "continuous") return gnull::datagen::TreatmentKind::continuous;
  throw gnull::Error(gnull::errc::invalid_argument,
                     where + ": treatment kind must be \"binary\" or "
                             "\"continuous\", got \"" +
                         name + "\"");
}

gnull::gformula::Mode parse_mode(const std::string& name,
                                 const std::string& where) {
  if (name == "mc") return gnull::gformula::Mode::mc;
  if (name == "enumerate") return gnull::gformula::Mode::enumerate_paths;
  throw gnull::Error(gnull::errc::invalid_argument,
                     where + ": mode must be \"mc\" or \"enumerate\", got \"" +
                         name + "\"");
}

// ---------------------------------------------------------------------------
// Model-spec JSON: {"level": "<builtin>"} or custom term lists.

gnull::features::Term parse_term(const json& j, const std::string& where) {
  require_keys(j, where, {"kind", "lag", "from_time", "to_offset"});
  const std::string kind = get_field<std::string>(j, where, "kind", "");
  if (kind.empty()) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       where + ": term needs a \"kind\"");
  }
  using gnull::features::Term;
  const int lag = get_field<int>(j, where, "lag", 0);
  const bool has_range = j.contains("from_time") || j.contains("to_offset");
  auto need_range = [&]() {
    if (!j.contains("from_time") || !j.contains("to_offset")) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": cumulative term \"" + kind +
                             "\" needs from_time and to_offset");
    }
    return std::make_pair(get_field<int>(j, where, "from_time", 0),
                          get_field<int>(j, where, "to_offset", 0));
  };
  auto no_range = [&]() {
    if (has_range) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": term \"" + kind +
                             "\" does not take from_time/to_offset");
    }
  };
  if (kind == "intercept") {
    no_range();
    return Term::intercept();
  }
  if (kind == "treatment_lag") {
    no_range();
    return Term::treatment_lag(lag);
  }
  if (kind == "covariate_lag") {
    no_range();
    return Term::covariate_lag(lag);
  }
  if (kind == "unmeasured_u") {
    no_range();
    return Term::unmeasured_u();
  }
  if (kind == "treatment_lag_times_u") {
    no_range();
    return Term::treatment_lag_times_u(lag);
  }
  if (kind == "treatment_cumsum") {
    const auto [from, to] = need_range();
    return Term::treatment_cumsum(from, to);
  }
  if (kind == "covariate_cumsum") {
    const auto [from, to] = need_range();
    return Term::covariate_cumsum(from, to);
  }
  if (kind == "covariate_cumavg") {
    const auto [from, to] = need_range();
    return Term::covariate_cumavg(from, to);
  }
  throw gnull::Error(gnull::errc::invalid_argument,
                     where + ": unknown term kind \"" + kind + "\"");
}

gnull::features::ModelSpec parse_model_spec(const json& j, int K,
                                            const std::string& where) {
  require_keys(j, where, {"level", "label", "covariate_terms", "outcome_terms"});
  if (j.contains("level")) {
    if (j.contains("label") || j.contains("covariate_terms") ||
        j.contains("outcome_terms")) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": give either \"level\" or custom term "
                                 "lists, not both");
    }
    const auto name = get_field<std::string>(j, where, "level", "");
    const auto level = gnull::features::level_from_name(name);
    if (!level || *level == gnull::features::Level::custom) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": level must be one of least, moderate, "
                                 "most, benchmark; got \"" +
                             name + "\"");
    }
    return gnull::features::builtin_spec(*level, K);
  }
  if (!j.contains("covariate_terms") || !j.contains("outcome_terms")) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       where + ": custom spec needs covariate_terms and "
                               "outcome_terms");
  }
  gnull::features::ModelSpec spec;
  spec.level = gnull::features::Level::custom;
  spec.label = get_field<std::string>(j, where, "label", "custom");
  for (const char* field : {"covariate_terms", "outcome_terms"}) {
    const json& arr = j.at(field);
    if (!arr.is_array() || arr.empty()) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": " + field + " must be a nonempty array");
    }
    auto& dst = std::string(field) == "covariate_terms" ? spec.covariate_terms
                                                        : spec.outcome_terms;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      dst.push_back(
          parse_term(arr[i], where + ": " + field + "[" + std::to_string(i) + "]"));
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------
// generate

gnull::datagen::DgpConfig parse_dgp_config(const json& j) {
  const std::string where = "dgp config";
  require_keys(j, where,
               {"treatment_kind", "K", "n", "master_seed", "n_prebaseline",
                "alpha", "outcome", "continuous_treatment", "binary_treatment"});
  const auto kind_name = get_field<std::string>(j, where, "treatment_kind", "");
  if (kind_name.empty()) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       where + ": treatment_kind is required");
  }
  const auto kind = parse_kind(kind_name, where);
  const int K = get_field<int>(j, where, "K", 1);
  const auto n = get_field<std::uint64_t>(j, where, "n", 1000);
  const auto seed = get_field<std::uint64_t>(j, where, "master_seed", 0);
  gnull::datagen::DgpConfig cfg =
      kind == gnull::datagen::TreatmentKind::binary
          ? gnull::datagen::DgpConfig::binary_defaults(K, n, seed)
          : gnull::datagen::DgpConfig::continuous_defaults(K, n, seed);
  cfg.n_prebaseline = get_field<int>(j, where, "n_prebaseline", cfg.n_prebaseline);
  if (j.contains("alpha")) {
    const auto alpha = get_field<std::vector<double>>(j, where, "alpha", {});
    if (alpha.size() != 4) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": alpha must have exactly 4 entries");
    }
    std::copy(alpha.begin(), alpha.end(), cfg.alpha.begin());
  }
  if (j.contains("outcome")) {
    const json& o = j.at("outcome");
    require_keys(o, where + ".outcome",
                 {"intercept", "u_slope", "sd", "lower", "upper"});
    cfg.outcome_intercept =
        get_field<double>(o, where, "intercept", cfg.outcome_intercept);
    cfg.outcome_u_slope =
        get_field<double>(o, where, "u_slope", cfg.outcome_u_slope);
    cfg.outcome_sd = get_field<double>(o, where, "sd", cfg.outcome_sd);
    cfg.outcome_lower = get_field<double>(o, where, "lower", cfg.outcome_lower);
    cfg.outcome_upper = get_field<double>(o, where, "upper", cfg.outcome_upper);
  }
  if (j.contains("continuous_treatment")) {
    const json& t = j.at("continuous_treatment");
    require_keys(t, where + ".continuous_treatment",
                 {"intercept", "lag_slope", "covariate_slope", "interaction",
                  "sd", "lower", "upper"});
    auto& p = cfg.continuous;
    p.intercept = get_field<double>(t, where, "intercept", p.intercept);
    p.lag_slope = get_field<double>(t, where, "lag_slope", p.lag_slope);
    p.covariate_slope =
        get_field<double>(t, where, "covariate_slope", p.covariate_slope);
    p.interaction = get_field<double>(t, where, "interaction", p.interaction);
    p.sd = get_field<double>(t, where, "sd", p.sd);
    p.lower = get_field<double>(t, where, "lower", p.lower);
    p.upper = get_field<double>(t, where, "upper", p.upper);
  }
  if (j.contains("binary_treatment")) {
    const json& t = j.at("binary_treatment");
    require_keys(t, where + ".binary_treatment", {"logit"});
    const auto logit = get_field<std::vector<double>>(t, where, "logit", {});
    if (logit.size() != 4) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": binary_treatment.logit must have exactly "
                                 "4 entries");
    }
    std::copy(logit.begin(), logit.end(), cfg.binary.logit.begin());
  }
  return cfg;
}

struct GenerateArgs {
  std::string config_path;
  std::string out_path;
  bool include_u = false;
  std::optional<std::uint64_t> seed;
  std::uint64_t replicate = 0;
};

int cmd_generate(const GenerateArgs& args) {
  gnull::datagen::DgpConfig cfg = parse_dgp_config(load_json_file(args.config_path));
  if (args.seed) cfg.master_seed = *args.seed;
  cfg.validate();
  const gnull::datagen::Dataset data =
      gnull::datagen::generate_dataset(cfg, args.replicate);
  gnull::datagen::write_csv_file(args.out_path, data, args.include_u);

  double l0_sum = 0.0;
  double y_sum = 0.0;
  for (const auto& t : data) {
    l0_sum += t.l_at(0);
    y_sum += t.y;
  }
  json out;
  out["out"] = args.out_path;
  out["n"] = data.size();
  out["K"] = cfg.K;
  out["treatment_kind"] =
      cfg.treatment_kind == gnull::datagen::TreatmentKind::binary
          ? "binary"
          : "continuous";
  out["p_l0"] = l0_sum / static_cast<double>(data.size());
  out["mean_y"] = y_sum / static_cast<double>(data.size());
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
  std::string data_path;
  std::string spec_path;
  int K = 1;
  double dose_low = 0.0;
  double dose_high = 1.0;
  std::uint64_t B = 100;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::string mode = "mc";
  std::uint64_t n_simul = 0;
  unsigned threads = 0;
};

json ci_json(const gnull::bootstrap::CiResult& ci) {
  return json{{"estimate", ci.point},
              {"ci_lower", ci.lower},
              {"ci_upper", ci.upper},
              {"level", ci.level}};
}

int cmd_estimate(const EstimateArgs& args) {
  const gnull::datagen::Dataset data =
      gnull::datagen::read_csv_file(args.data_path);
  const gnull::features::ModelSpec spec = parse_model_spec(
      load_json_file(args.spec_path), args.K, "model spec");
  const gnull::gformula::Mode mode = parse_mode(args.mode, "estimate");
  if (mode == gnull::gformula::Mode::enumerate_paths) {
    for (const auto& t : data) {
      for (double l : t.l) {
        if (l != 0.0 && l != 1.0) {
          throw gnull::Error(gnull::errc::invalid_argument,
                             "enumeration requires binary covariates");
        }
      }
    }
  }
  const auto interventions = std::make_pair(
      gnull::gformula::static_intervention(
          "all_" + gnull::fmt_double(args.dose_low), args.dose_low, args.K),
      gnull::gformula::static_intervention(
          "all_" + gnull::fmt_double(args.dose_high), args.dose_high, args.K));
  gnull::gformula::EstimateConfig cfg;
  cfg.mode = mode;
  cfg.n_simul = args.n_simul;
  cfg.seed = gnull::derive_seed(args.seed, {gnull::stream::mc_unit});
  cfg.threads = args.threads;

  json out;
  out["K"] = args.K;
  out["mode"] = args.mode;
  out["spec"] = spec.label;
  out["n"] = data.size();
  if (args.B == 0) {
    const auto r =
        gnull::gformula::estimate_effect(data, spec, args.K, interventions, cfg);
    out["interventions"] = json::array(
        {json{{"label", r.labels[0]}, {"estimate", r.means[0]}},
         json{{"label", r.labels[1]}, {"estimate", r.means[1]}}});
    out["difference"] = json{{"estimate", r.difference}};
  } else {
    const auto boot = gnull::bootstrap::bootstrap_gformula(
        data, spec, args.K, interventions, cfg, args.B, args.level, args.seed,
        args.threads);
    json low = ci_json(boot.mean_first);
    low["label"] = interventions.first.label;
    json high = ci_json(boot.mean_second);
    high["label"] = interventions.second.label;
    out["interventions"] = json::array({low, high});
    out["difference"] = ci_json(boot.difference);
    out["bootstrap"] = json{{"B", boot.B}, {"n_failed", boot.n_failed}};
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// paradox

struct ParadoxArgs {
  std::vector<double> theta;
  std::vector<double> beta;
  std::string check = "sharp-null";
  double tol = 1e-9;
};

int cmd_paradox(const ParadoxArgs& args) {
  for (double v : args.theta) {
    if (!std::isfinite(v)) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         "paradox: theta values must be finite");
    }
  }
  for (double v : args.beta) {
    if (!std::isfinite(v)) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         "paradox: beta values must be finite");
    }
  }
  if (!(args.tol > 0.0)) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       "paradox: tol must be positive");
  }
  gnull::paradox::PgfParams p;
  p.theta0 = args.theta[0];
  p.theta1 = args.theta[1];
  p.theta2 = args.theta[2];
  p.theta3 = args.theta[3];
  p.beta0 = args.beta[0];
  p.beta1 = args.beta[1];

  gnull::paradox::NullCompatibility verdict;
  if (args.check == "sharp-null") {
    verdict = gnull::paradox::check_sharp_null(p, args.tol);
  } else if (args.check == "a1-only") {
    verdict = gnull::paradox::check_a1_only_msm(p, args.tol);
  } else {
    throw gnull::Error(gnull::errc::invalid_argument,
                       "paradox: --check must be sharp-null or a1-only");
  }
  const auto m = gnull::paradox::msm_closed_form(p);
  json out;
  out["h"] = json{{"h00", gnull::paradox::evaluate_h(p, 0, 0)},
                  {"h01", gnull::paradox::evaluate_h(p, 0, 1)},
                  {"h10", gnull::paradox::evaluate_h(p, 1, 0)},
                  {"h11", gnull::paradox::evaluate_h(p, 1, 1)}};
  out["psi"] = json{
      {"psi0", m.psi0}, {"psi1", m.psi1}, {"psi2", m.psi2}, {"psi3", m.psi3}};
  out["check"] = args.check;
  out["compatible"] = verdict.compatible;
  out["condition"] = gnull::paradox::condition_name(verdict.condition);
  out["residual"] = verdict.residual;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string config_path;
  std::string out_dir;  // resolved default applied by caller
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scale;
  std::optional<std::string> mode;
  unsigned threads = 0;
};

struct SimulatePlan {
  std::string scale = "desk";
  std::vector<gnull::datagen::TreatmentKind> kinds;
  std::vector<int> Ks;
  std::vector<gnull::features::Level> levels;
  std::uint64_t master_seed = 20210706;
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> n_replicates;
  std::optional<std::uint64_t> bootstrap_B;
  double ci_level = 0.95;
  gnull::gformula::Mode mode = gnull::gformula::Mode::mc;
  bool allow_custom_K = false;
  std::array<double, 2> binary_doses{0.0, 1.0};
  std::array<double, 2> continuous_doses{50.0, 150.0};
};

SimulatePlan parse_simulate_config(const json& j, const SimulateArgs& args) {
  const std::string where = "simulate config";
  require_keys(j, where,
               {"scale", "treatment_kinds", "K_values", "flexibilities",
                "master_seed", "n", "n_replicates", "bootstrap_B", "ci_level",
                "mode", "allow_custom_K", "binary_doses", "continuous_doses"});
  SimulatePlan plan;
  plan.scale = get_field<std::string>(j, where, "scale", "desk");
  if (args.scale) plan.scale = *args.scale;
  if (plan.scale != "desk" && plan.scale != "paper") {
    throw gnull::Error(gnull::errc::invalid_argument,
                       where + ": scale must be \"desk\" or \"paper\"");
  }

  const auto kind_names = get_field<std::vector<std::string>>(
      j, where, "treatment_kinds", {"binary", "continuous"});
  if (kind_names.empty()) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       where + ": treatment_kinds must be nonempty");
  }
  for (const auto& name : kind_names) {
    plan.kinds.push_back(parse_kind(name, where));
  }

  plan.allow_custom_K = get_field<bool>(j, where, "allow_custom_K", false);
  plan.Ks = [&] {
    const auto ks =
        get_field<std::vector<int>>(j, where, "K_values", {1, 5, 10});
    if (ks.empty()) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": K_values must be nonempty");
    }
    return ks;
  }();
  for (int k : plan.Ks) {
    if (!plan.allow_custom_K && k != 1 && k != 5 && k != 10) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         "K must be one of 1,5,10 unless allow_custom_K=true");
    }
    if (k < 1) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": K values must be >= 1");
    }
  }

  const auto level_names = get_field<std::vector<std::string>>(
      j, where, "flexibilities",
      {"least", "moderate", "most", "benchmark"});
  if (level_names.empty()) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       where + ": flexibilities must be nonempty");
  }
  for (const auto& name : level_names) {
    const auto level = gnull::features::level_from_name(name);
    if (!level || *level == gnull::features::Level::custom) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": flexibility must be one of least, "
                                 "moderate, most, benchmark; got \"" +
                             name + "\"");
    }
    plan.levels.push_back(*level);
  }

  plan.master_seed =
      get_field<std::uint64_t>(j, where, "master_seed", 20210706);
  if (args.seed) plan.master_seed = *args.seed;
  if (j.contains("n")) plan.n = get_field<std::uint64_t>(j, where, "n", 0);
  if (j.contains("n_replicates")) {
    plan.n_replicates = get_field<std::uint64_t>(j, where, "n_replicates", 0);
  }
  if (j.contains("bootstrap_B")) {
    plan.bootstrap_B = get_field<std::uint64_t>(j, where, "bootstrap_B", 0);
  }
  plan.ci_level = get_field<double>(j, where, "ci_level", 0.95);
  if (!(plan.ci_level > 0.0 && plan.ci_level < 1.0)) {
    throw gnull::Error(gnull::errc::invalid_argument,
                       where + ": ci_level must be in (0, 1)");
  }
  std::string mode_name = get_field<std::string>(j, where, "mode", "mc");
  if (args.mode) mode_name = *args.mode;
  plan.mode = parse_mode(mode_name, where);

  for (const char* key : {"binary_doses", "continuous_doses"}) {
    if (!j.contains(key)) continue;
    const auto v = get_field<std::vector<double>>(j, where, key, {});
    if (v.size() != 2) {
      throw gnull::Error(gnull::errc::invalid_argument,
                         where + ": " + key + " must be [low, high]");
    }
    auto& dst = std::string(key) == "binary_doses" ? plan.binary_doses
                                                   : plan.continuous_doses;
    dst = {v[0], v[1]};
  }
  return plan;
}

gnull::study::ScenarioConfig scenario_for(const SimulatePlan& plan,
                                          gnull::datagen::TreatmentKind kind,
                                          int K, unsigned threads) {
  gnull::study::ScenarioConfig s =
      plan.scale == "paper"
          ? gnull::study::paper_scenario(kind, K, plan.master_seed)
          : gnull::study::desk_scenario(kind, K, plan.master_seed);
  if (plan.n) s.n = *plan.n;
  if (plan.n_replicates) s.n_replicates = static_cast<int>(*plan.n_replicates);
  if (plan.bootstrap_B) s.bootstrap_B = *plan.bootstrap_B;
  s.ci_level = plan.ci_level;
  s.mode = plan.mode;
  s.threads = threads;
  const auto& doses = kind == gnull::datagen::TreatmentKind::binary
                          ? plan.binary_doses
                          : plan.continuous_doses;
  s.dose_low = doses[0];
  s.dose_high = doses[1];
  return s;
}

// Canonical resolved-settings dump; nlohmann serializes object keys sorted,
// so equal effective settings hash equal regardless of config-file layout.
std::string canonical_config(const SimulatePlan& plan) {
  json c;
  c["scale"] = plan.scale;
  json kinds = json::array();
  for (auto kind : plan.kinds) kinds.push_back(gnull::study::kind_name(kind));
  c["treatment_kinds"] = kinds;
  c["K_values"] = plan.Ks;
  json levels = json::array();
  for (auto level : plan.levels) {
    levels.push_back(gnull::features::level_name(level));
  }
  c["flexibilities"] = levels;
  c["master_seed"] = plan.master_seed;
  const gnull::study::ScenarioConfig probe =
      scenario_for(plan, plan.kinds.front(), plan.Ks.front(), 0);
  c["n"] = probe.n;
  c["n_replicates"] = probe.n_replicates;
  c["bootstrap_B"] = probe.bootstrap_B;
  c["ci_level"] = plan.ci_level;
  c["mode"] =
      plan.mode == gnull::gformula::Mode::mc ? "mc" : "enumerate";
  c["allow_custom_K"] = plan.allow_custom_K;
  c["binary_doses"] = plan.binary_doses;
  c["continuous_doses"] = plan.continuous_doses;
  return c.dump();
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) {
      throw gnull::Error(gnull::errc::io_error,
                         "cannot write " + tmp.string());
    }
    os << content;
    if (!os.flush()) {
      throw gnull::Error(gnull::errc::io_error,
                         "failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw gnull::Error(gnull::errc::io_error,
                       "cannot move " + tmp.string() + " into place: " +
                           ec.message());
  }
}

int cmd_simulate(const SimulateArgs& args) {
  const SimulatePlan plan =
      parse_simulate_config(load_json_file(args.config_path), args);
  const fs::path out_dir = args.out_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw gnull::Error(gnull::errc::io_error,
                       "cannot create " + out_dir.string() + ": " +
                           ec.message());
  }

  const std::string started = utc_now();
  json cell_statuses = json::array();
  std::vector<gnull::study::CellResult> done;
  bool any_failed = false;

  for (auto kind : plan.kinds) {
    for (int K : plan.Ks) {
      const gnull::study::ScenarioConfig scenario =
          scenario_for(plan, kind, K, args.threads);
      for (auto level : plan.levels) {
        const std::string cell_name =
            scenario.id() + "/" + gnull::features::level_name(level);
        const auto t0 = std::chrono::steady_clock::now();
        json status;
        status["scenario"] = scenario.id();
        status["flexibility"] = gnull::features::level_name(level);
        try {
          gnull::study::CellResult cell =
              gnull::study::run_cell(scenario, level);
          const double secs =
              std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count();
          std::fprintf(stderr, "cell %s: %d replicates, %zu failed (%.1fs)\n",
                       cell_name.c_str(), scenario.n_replicates,
                       cell.n_failed, secs);
          status["status"] = "ok";
          status["n_replicates"] = scenario.n_replicates;
          status["n_failed_replicates"] = cell.n_failed;
          done.push_back(std::move(cell));
        } catch (const gnull::Error& e) {
          std::fprintf(stderr, "cell %s: FAILED: %s\n", cell_name.c_str(),
                       e.what());
          status["status"] = "failed";
          status["message"] = e.what();
          any_failed = true;
        }
        cell_statuses.push_back(std::move(status));
      }
    }
  }

  if (!done.empty()) {
    gnull::study::emit_report(done, out_dir);
  }

  const std::string canonical = canonical_config(plan);
  json manifest;
  manifest["tool_version"] = gnull::version_string;
  manifest["config_hash"] = "fnv1a64:" + hex64(fnv1a64(canonical));
  manifest["config"] = json::parse(canonical);
  manifest["master_seed"] = plan.master_seed;
  manifest["threads_requested"] = args.threads;
  manifest["started_utc"] = started;
  manifest["finished_utc"] = utc_now();
  manifest["out_dir"] = out_dir.string();
  manifest["cells"] = std::move(cell_statuses);
  write_atomic(out_dir / "run_manifest.json", manifest.dump(2) + "\n");

  std::fprintf(stderr, "report: %s\n",
               (out_dir / "summary.csv").string().c_str());
  return any_failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Longitudinal causal-effect estimation toolkit"};
  app.set_version_flag("--version", gnull::version_string);
  app.require_subcommand(1);

  const char* env_out = std::getenv("GNULL_OUT");
  const std::string default_out = env_out != nullptr ? env_out : "out";

  // simulate
  SimulateArgs sim;
  sim.out_dir = default_out;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Run the bias/SE/coverage study");
  simulate->add_option("--config", sim.config_path, "Study config JSON")
      ->required();
  simulate->add_option("--out", sim.out_dir,
                       "Output directory (default $GNULL_OUT or ./out)");
  std::uint64_t sim_seed = 0;
  CLI::Option* sim_seed_opt =
      simulate->add_option("--seed", sim_seed, "Override master seed");
  std::string sim_scale;
  CLI::Option* sim_scale_opt =
      simulate->add_option("--scale", sim_scale, "Override scale: desk|paper");
  std::string sim_mode;
  CLI::Option* sim_mode_opt =
      simulate->add_option("--mode", sim_mode, "Override mode: mc|enumerate");
  simulate->add_option("--threads", sim.threads,
                       "Worker threads (0 = all cores)");

  // estimate
  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Estimate intervention means on one dataset");
  estimate->add_option("--data", est.data_path, "Dataset CSV")->required();
  estimate->add_option("--spec", est.spec_path, "Model spec JSON")->required();
  estimate->add_option("--K", est.K, "Final time index")->required();
  estimate->add_option("--dose-low", est.dose_low, "Low static dose")
      ->required();
  estimate->add_option("--dose-high", est.dose_high, "High static dose")
      ->required();
  estimate->add_option("--B", est.B, "Bootstrap resamples (0 = no intervals)");
  estimate->add_option("--level", est.level, "Confidence level");
  estimate->add_option("--seed", est.seed, "Random seed");
  estimate->add_option("--mode", est.mode, "mc|enumerate");
  estimate->add_option("--n-simul", est.n_simul,
                       "Simulation units (0 = one per observed baseline)");
  estimate->add_option("--threads", est.threads,
                       "Worker threads (0 = all cores)");

  // paradox
  ParadoxArgs par;
  CLI::App* paradox = app.add_subcommand(
      "paradox", "Closed-form two-period compatibility analysis");
  paradox
      ->add_option("--theta", par.theta,
                   "theta0 theta1 theta2 theta3 of the outcome model")
      ->expected(4)
      ->required();
  paradox
      ->add_option("--beta", par.beta, "beta0 beta1 of the covariate model")
      ->expected(2)
      ->required();
  paradox->add_option("--check", par.check, "sharp-null|a1-only");
  paradox->add_option("--tol", par.tol, "Compatibility tolerance");

  // generate
  GenerateArgs gen;
  CLI::App* generate =
      app.add_subcommand("generate", "Generate one dataset as CSV");
  generate->add_option("--config", gen.config_path, "Generator config JSON")
      ->required();
  generate->add_option("--out", gen.out_path, "Output CSV path")->required();
  generate->add_flag("--include-u", gen.include_u,
                     "Append the latent U column");
  std::uint64_t gen_seed = 0;
  CLI::Option* gen_seed_opt =
      generate->add_option("--seed", gen_seed, "Override master seed");
  generate->add_option("--replicate", gen.replicate, "Replicate index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    // CLI11 returns 0 for --help/--version; anything else is a usage error.
    return rc == 0 ? 0 : 1;
  }

  if (sim_seed_opt->count() > 0) sim.seed = sim_seed;
  if (sim_scale_opt->count() > 0) sim.scale = sim_scale;
  if (sim_mode_opt->count() > 0) sim.mode = sim_mode;
  if (gen_seed_opt->count() > 0) gen.seed = gen_seed;

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*estimate) return cmd_estimate(est);
    if (*paradox) return cmd_paradox(par);
    if (*generate) return cmd_generate(gen);
  } catch (const gnull::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
