#include "gnull/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>

#include "gnull/bootstrap.hpp"
#include "gnull/error.hpp"
#include "gnull/parallel.hpp"
#include "gnull/rng.hpp"
#include "gnull/textio.hpp"

namespace gnull::study {

namespace fs = std::filesystem;

const char* kind_name(datagen::TreatmentKind kind) {
  return kind == datagen::TreatmentKind::binary ? "binary" : "continuous";
}

const char* target_name(Target t) {
  switch (t) {
    case Target::mean_low:
      return "mean_low";
    case Target::mean_high:
      return "mean_high";
    case Target::difference:
      return "difference";
  }
  return "difference";
}

std::string ScenarioConfig::id() const {
  return std::string(kind_name(kind)) + "_K" + std::to_string(K);
}

namespace {

ScenarioConfig base_scenario(datagen::TreatmentKind kind, int K,
                             std::uint64_t master_seed) {
  ScenarioConfig s;
  s.kind = kind;
  s.K = K;
  s.master_seed = master_seed;
  if (kind == datagen::TreatmentKind::binary) {
    s.dose_low = 0.0;
    s.dose_high = 1.0;
  } else {
    s.dose_low = 50.0;
    s.dose_high = 150.0;
  }
  return s;
}

}  // namespace

ScenarioConfig desk_scenario(datagen::TreatmentKind kind, int K,
                             std::uint64_t master_seed) {
  ScenarioConfig s = base_scenario(kind, K, master_seed);
  s.n = 2000;
  s.n_replicates = 50;
  s.bootstrap_B = 100;
  return s;
}

ScenarioConfig paper_scenario(datagen::TreatmentKind kind, int K,
                              std::uint64_t master_seed) {
  ScenarioConfig s = base_scenario(kind, K, master_seed);
  s.n = 10000;
  s.n_replicates = 250;
  s.bootstrap_B = 250;
  return s;
}

CellResult run_cell(const ScenarioConfig& scenario,
                    features::Level flexibility) {
  if (scenario.n_replicates < 1) {
    throw Error(errc::invalid_argument, "a cell needs at least one replicate");
  }

  const auto kind_code = static_cast<std::uint64_t>(scenario.kind);
  const auto k_code = static_cast<std::uint64_t>(scenario.K);
  const auto level_code = static_cast<std::uint64_t>(flexibility);
  // Data streams are keyed without flexibility: cells that differ only in
  // model flexibility see identical replicate datasets.
  const std::uint64_t data_seed = derive_seed(
      scenario.master_seed, {stream::study_data, kind_code, k_code});
  datagen::DgpConfig dgp =
      scenario.kind == datagen::TreatmentKind::binary
          ? datagen::DgpConfig::binary_defaults(scenario.K, scenario.n,
                                                data_seed)
          : datagen::DgpConfig::continuous_defaults(scenario.K, scenario.n,
                                                    data_seed);
  dgp.validate();

  const features::ModelSpec spec = features::builtin_spec(flexibility, scenario.K);
  const auto interventions = std::make_pair(
      gformula::static_intervention(
          "all_" + fmt_double(scenario.dose_low), scenario.dose_low,
          scenario.K),
      gformula::static_intervention(
          "all_" + fmt_double(scenario.dose_high), scenario.dose_high,
          scenario.K));

  CellResult cell;
  cell.scenario = scenario;
  cell.flexibility = flexibility;
  cell.flexibility_label = features::level_name(flexibility);
  cell.replicates.resize(static_cast<std::size_t>(scenario.n_replicates));

  const std::size_t reps = cell.replicates.size();
  const unsigned workers = effective_threads(scenario.threads);
  parallel_chunks(reps, workers, [&](std::size_t begin,
                                               std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      ReplicateOutcome& out = cell.replicates[r];
      out.replicate = static_cast<int>(r);
      try {
        const datagen::Dataset data = datagen::generate_dataset(dgp, r);
        gformula::EstimateConfig est;
        est.mode = scenario.mode;
        est.n_simul = 0;  // one simulated unit per observed baseline
        est.threads = 1;  // parallelism lives across replicates
        est.seed = derive_seed(scenario.master_seed,
                               {stream::study_mc, kind_code, k_code,
                                level_code, r});
        const std::uint64_t boot_seed =
            derive_seed(scenario.master_seed,
                        {stream::study_boot, kind_code, k_code, level_code, r});
        const bootstrap::BootstrapResult boot = bootstrap::bootstrap_gformula(
            data, spec, scenario.K, interventions, est, scenario.bootstrap_B,
            scenario.ci_level, boot_seed, 1);
        const std::array<const bootstrap::CiResult*, 3> by_target = {
            &boot.mean_first, &boot.mean_second, &boot.difference};
        for (std::size_t t = 0; t < by_target.size(); ++t) {
          out.estimate[t] = by_target[t]->point;
          out.ci_lower[t] = by_target[t]->lower;
          out.ci_upper[t] = by_target[t]->upper;
        }
        out.ok = true;
      } catch (const Error& e) {
        out.ok = false;
        out.message = e.what();
      }
    }
  });

  std::string first_failure;
  for (const ReplicateOutcome& r : cell.replicates) {
    if (!r.ok) {
      ++cell.n_failed;
      if (first_failure.empty()) first_failure = r.message;
    }
  }
  if (cell.n_failed * 20 > reps) {
    throw Error(errc::cell_failure,
                "cell " + scenario.id() + "/" + cell.flexibility_label + ": " +
                    std::to_string(cell.n_failed) + " of " +
                    std::to_string(reps) +
                    " replicates failed; first failure: " + first_failure);
  }
  return cell;
}

std::vector<MetricsRow> summarize(const CellResult& cell) {
  bool any_ok = false;
  for (const ReplicateOutcome& r : cell.replicates) any_ok |= r.ok;
  if (!any_ok) {
    throw Error(errc::invalid_argument,
                "summarize: cell " + cell.scenario.id() + "/" +
                    cell.flexibility_label + " has no successful replicates");
  }
  std::vector<MetricsRow> rows;
  rows.reserve(all_targets.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Target target : all_targets) {
    const auto t = static_cast<std::size_t>(target);
    const double truth =
        target == Target::difference ? truth_difference : truth_mean;
    double sum = 0.0;
    int used = 0;
    int covered = 0;
    for (const ReplicateOutcome& r : cell.replicates) {
      if (!r.ok) continue;
      ++used;
      sum += r.estimate[t];
      if (r.ci_lower[t] <= truth && truth <= r.ci_upper[t]) ++covered;
    }
    MetricsRow row;
    row.scenario_id = cell.scenario.id();
    row.treatment = kind_name(cell.scenario.kind);
    row.K = cell.scenario.K;
    row.flexibility = cell.flexibility_label;
    row.target = target;
    row.truth = truth;
    row.n_replicates_used = used;
    if (used == 0) {
      row.bias = nan;
      row.se = nan;
      row.coverage = nan;
    } else {
      const double mean = sum / used;
      row.bias = mean - truth;
      row.coverage = static_cast<double>(covered) / used;
      if (used < 2) {
        row.se = nan;
      } else {
        double ss = 0.0;
        for (const ReplicateOutcome& r : cell.replicates) {
          if (!r.ok) continue;
          const double d = r.estimate[t] - mean;
          ss += d * d;
        }
        row.se = std::sqrt(ss / (used - 1));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error(errc::io_error, "cannot write " + path.string());
  }
  return os;
}

std::string fmt2(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void write_replicates_csv(const fs::path& dir, const CellResult& cell) {
  std::ofstream os = open_output(dir / "replicates.csv");
  os << "scenario,flexibility,replicate,target,estimate,ci_lower,ci_upper\n";
  const std::string id = cell.scenario.id();
  for (const ReplicateOutcome& r : cell.replicates) {
    if (!r.ok) continue;
    for (Target target : all_targets) {
      const auto t = static_cast<std::size_t>(target);
      os << id << ',' << cell.flexibility_label << ',' << r.replicate << ','
         << target_name(target) << ',' << fmt_double(r.estimate[t])
         << ',' << fmt_double(r.ci_lower[t]) << ','
         << fmt_double(r.ci_upper[t]) << '\n';
    }
  }
  if (!os) throw Error(errc::io_error, "failed writing replicates.csv");
}

// Canonical presentation order for flexibility levels.
constexpr std::array<features::Level, 4> level_order = {
    features::Level::least, features::Level::moderate, features::Level::most,
    features::Level::benchmark};

void write_summary_md(const fs::path& out_dir,
                      const std::vector<CellResult>& cells,
                      const std::vector<MetricsRow>& rows) {
  std::ofstream os = open_output(out_dir / "summary.md");
  os << "# Simulation summary\n";

  // (treatment, K, flexibility, target) -> row
  std::map<std::tuple<std::string, int, std::string, int>, const MetricsRow*>
      index;
  for (const MetricsRow& row : rows) {
    index[{row.treatment, row.K, row.flexibility,
           static_cast<int>(row.target)}] = &row;
  }

  for (datagen::TreatmentKind kind :
       {datagen::TreatmentKind::binary, datagen::TreatmentKind::continuous}) {
    const std::string kind_label = kind_name(kind);
    // Ks present for this kind, ascending; dose labels from the first cell.
    std::vector<int> ks;
    std::string low_label, high_label;
    for (const CellResult& cell : cells) {
      if (cell.scenario.kind != kind) continue;
      if (std::find(ks.begin(), ks.end(), cell.scenario.K) == ks.end()) {
        ks.push_back(cell.scenario.K);
      }
      if (low_label.empty()) {
        low_label = "all_" + fmt_double(cell.scenario.dose_low);
        high_label = "all_" + fmt_double(cell.scenario.dose_high);
      }
    }
    if (ks.empty()) continue;
    std::sort(ks.begin(), ks.end());

    os << "\n## " << static_cast<char>(std::toupper(kind_label[0]))
       << kind_label.substr(1) << " treatment\n";
    const std::array<std::string, 3> section_title = {
        "Mean under " + low_label + " (truth " + fmt2(truth_mean) + ")",
        "Mean under " + high_label + " (truth " + fmt2(truth_mean) + ")",
        "Difference in means (truth " + fmt2(truth_difference) + ")"};
    // Difference first; the two regime means follow.
    for (Target target :
         {Target::difference, Target::mean_low, Target::mean_high}) {
      os << "\n### " << section_title[static_cast<std::size_t>(target)]
         << "\n\n";
      os << "| Flexibility | K | Bias | SE | Coverage |\n";
      os << "|---|---|---|---|---|\n";
      for (features::Level level : level_order) {
        for (int k : ks) {
          const auto it = index.find({kind_label, k,
                                      features::level_name(level),
                                      static_cast<int>(target)});
          if (it == index.end()) continue;
          const MetricsRow& row = *it->second;
          os << "| " << row.flexibility << " | " << row.K << " | "
             << fmt2(row.bias) << " | " << fmt2(row.se) << " | "
             << fmt2(row.coverage) << " |\n";
        }
      }
    }
  }
  if (!os) throw Error(errc::io_error, "failed writing summary.md");
}

}  // namespace

std::vector<MetricsRow> emit_report(const std::vector<CellResult>& cells,
                                    const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw Error(errc::io_error,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }

  std::vector<MetricsRow> rows;
  for (const CellResult& cell : cells) {
    const fs::path dir =
        out_dir / cell.scenario.id() / cell.flexibility_label;
    fs::create_directories(dir, ec);
    if (ec) {
      throw Error(errc::io_error,
                  "cannot create " + dir.string() + ": " + ec.message());
    }
    write_replicates_csv(dir, cell);
    for (MetricsRow& row : summarize(cell)) {
      rows.push_back(std::move(row));
    }
  }

  {
    std::ofstream os = open_output(out_dir / "summary.csv");
    os << "treatment,K,flexibility,target,truth,bias,se,coverage,"
          "n_replicates_used\n";
    for (const MetricsRow& row : rows) {
      os << row.treatment << ',' << row.K << ',' << row.flexibility << ','
         << target_name(row.target) << ',' << fmt_double(row.truth)
         << ',' << fmt_double(row.bias) << ','
         << fmt_double(row.se) << ','
         << fmt_double(row.coverage) << ',' << row.n_replicates_used
         << '\n';
    }
    if (!os) throw Error(errc::io_error, "failed writing summary.csv");
  }

  write_summary_md(out_dir, cells, rows);
  return rows;
}

}  // namespace gnull::study
