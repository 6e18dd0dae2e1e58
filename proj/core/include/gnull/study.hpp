#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gnull/datagen.hpp"
#include "gnull/features.hpp"
#include "gnull/gformula.hpp"

namespace gnull::study {

const char* kind_name(datagen::TreatmentKind kind);

// The three quantities each simulation replicate estimates.
enum class Target { mean_low = 0, mean_high = 1, difference = 2 };
inline constexpr std::array<Target, 3> all_targets = {
    Target::mean_low, Target::mean_high, Target::difference};
const char* target_name(Target t);

// True values under the default generating process: the outcome mean is
// intercept + slope * E[U] = 350 + 300 * 0.5 (interval truncation moves this
// by far less than any reported digit), identical under every static regime
// because treatment never enters the outcome process.
inline constexpr double truth_mean = 500.0;
inline constexpr double truth_difference = 0.0;

// One simulation cell: a treatment kind and horizon, estimated at one model
// flexibility across n_replicates independently generated datasets.
struct ScenarioConfig {
  datagen::TreatmentKind kind = datagen::TreatmentKind::binary;
  int K = 5;
  std::size_t n = 2000;            // individuals per replicate
  int n_replicates = 50;
  std::size_t bootstrap_B = 100;   // resamples per replicate
  double ci_level = 0.95;
  double dose_low = 0.0;           // static regime held at the low dose
  double dose_high = 1.0;          // static regime held at the high dose
  std::uint64_t master_seed = 20210706;
  gformula::Mode mode = gformula::Mode::mc;
  unsigned threads = 0;            // 0 = all hardware threads

  std::string id() const;  // e.g. "binary_K5"
};

// Scenario presets. "desk" sizes a laptop-scale run (n=2000, 50 replicates,
// 100 bootstrap resamples); "paper" sizes the full run (n=10000, 250
// replicates, 250 resamples). Doses default by kind: 0/1 for binary
// treatment, 50/150 for continuous.
ScenarioConfig desk_scenario(datagen::TreatmentKind kind, int K,
                             std::uint64_t master_seed);
ScenarioConfig paper_scenario(datagen::TreatmentKind kind, int K,
                              std::uint64_t master_seed);

struct ReplicateOutcome {
  int replicate = 0;
  bool ok = false;
  std::string message;                  // failure reason when !ok
  std::array<double, 3> estimate{};     // indexed by Target
  std::array<double, 3> ci_lower{};
  std::array<double, 3> ci_upper{};
};

struct CellResult {
  ScenarioConfig scenario;
  features::Level flexibility = features::Level::least;
  std::string flexibility_label;
  std::vector<ReplicateOutcome> replicates;
  std::size_t n_failed = 0;
};

// Runs every replicate of one cell. Replicate r draws its dataset from a
// substream keyed by (master_seed, kind, K, r) — deliberately not by
// flexibility, so cells that differ only in flexibility analyze identical
// datasets — and its estimation/bootstrap streams from substreams that do
// include flexibility. Replicates run in parallel; results are independent
// of thread count. Throws errc::cell_failure if more than 5% of replicates
// fail.
CellResult run_cell(const ScenarioConfig& scenario,
                    features::Level flexibility);

struct MetricsRow {
  std::string scenario_id;
  std::string treatment;
  int K = 0;
  std::string flexibility;
  Target target = Target::difference;
  double truth = 0.0;
  double bias = 0.0;      // mean(estimate) - truth over successful replicates
  double se = 0.0;        // sample SD of estimates (divisor n-1)
  double coverage = 0.0;  // fraction of intervals containing the truth
  int n_replicates_used = 0;
};

// Three rows (mean_low, mean_high, difference) for one cell.
std::vector<MetricsRow> summarize(const CellResult& cell);

// Writes out_dir/<scenario>/<flexibility>/replicates.csv for each cell plus
// out_dir/summary.csv and out_dir/summary.md, and returns all metric rows in
// emission order. Output bytes depend only on the cell contents.
std::vector<MetricsRow> emit_report(const std::vector<CellResult>& cells,
                                    const std::filesystem::path& out_dir);

}  // namespace gnull::study
