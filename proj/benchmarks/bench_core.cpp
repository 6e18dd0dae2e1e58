// Microbenchmarks for the hot paths: GLM fits, dataset generation, and the
// two counterfactual-mean engines. Each case is sized like one unit of work
// inside a simulation replicate, so regressions here translate directly
// into study wall-clock time.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <gnull/bootstrap.hpp>
#include <gnull/datagen.hpp>
#include <gnull/features.hpp>
#include <gnull/gformula.hpp>
#include <gnull/glm.hpp>
#include <gnull/rng.hpp>

using namespace gnull;

namespace {

// A pooled logistic design of the shape the covariate model sees:
// n individuals x K times, a handful of columns.
void make_logistic_problem(int rows, int cols, Eigen::MatrixXd& X,
                           Eigen::VectorXd& y) {
  Rng rng(derive_seed(7001, {static_cast<std::uint64_t>(rows),
                             static_cast<std::uint64_t>(cols)}));
  X.resize(rows, cols);
  y.resize(rows);
  for (int i = 0; i < rows; ++i) {
    X(i, 0) = 1.0;
    double eta = -0.3;
    for (int j = 1; j < cols; ++j) {
      X(i, j) = rng.normal();
      eta += 0.4 * X(i, j) / j;
    }
    y[i] = rng.bernoulli(glm::expit(eta)) ? 1.0 : 0.0;
  }
}

void BM_fit_logistic(benchmark::State& state) {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  make_logistic_problem(static_cast<int>(state.range(0)),
                        static_cast<int>(state.range(1)), X, y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(glm::fit_logistic(X, y));
  }
}
BENCHMARK(BM_fit_logistic)->Args({2000, 3})->Args({10000, 5})->Args({20000, 12});

void BM_fit_linear(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const int cols = static_cast<int>(state.range(1));
  Rng rng(derive_seed(7002, {static_cast<std::uint64_t>(rows)}));
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd y(rows);
  for (int i = 0; i < rows; ++i) {
    X(i, 0) = 1.0;
    double mu = 350.0;
    for (int j = 1; j < cols; ++j) {
      X(i, j) = rng.normal();
      mu += 5.0 * X(i, j);
    }
    y[i] = mu + 50.0 * rng.normal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(glm::fit_linear(X, y));
  }
}
BENCHMARK(BM_fit_linear)->Args({2000, 5})->Args({10000, 13});

void BM_generate_dataset(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto cfg = datagen::DgpConfig::binary_defaults(K, n, 7003);
  for (auto _ : state) {
    benchmark::DoNotOptimize(datagen::generate_dataset(cfg, 0));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_generate_dataset)->Args({5, 2000})->Args({10, 2000});

void BM_mc_mean(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto cfg = datagen::DgpConfig::binary_defaults(K, 2000, 7004);
  const auto data = datagen::generate_dataset(cfg, 0);
  const auto spec = features::builtin_spec(features::Level::moderate, K);
  const auto fit = gformula::fit_nuisance(data, spec, K);
  const auto iv = gformula::static_intervention("all_1", 1.0, K);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gformula::mc_counterfactual_mean(fit, iv, data.size(), 7005, 1));
  }
}
BENCHMARK(BM_mc_mean)->Arg(1)->Arg(5)->Arg(10);

void BM_enumerate_mean(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto cfg = datagen::DgpConfig::binary_defaults(K, 500, 7006);
  const auto data = datagen::generate_dataset(cfg, 0);
  const auto spec = features::builtin_spec(features::Level::moderate, K);
  const auto fit = gformula::fit_nuisance(data, spec, K);
  const auto iv = gformula::static_intervention("all_1", 1.0, K);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gformula::enumerate_counterfactual_mean(fit, iv));
  }
}
BENCHMARK(BM_enumerate_mean)->Arg(1)->Arg(5)->Arg(10);

void BM_estimate_effect(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto cfg = datagen::DgpConfig::binary_defaults(K, 2000, 7007);
  const auto data = datagen::generate_dataset(cfg, 0);
  const auto spec = features::builtin_spec(features::Level::moderate, K);
  const auto ivs =
      std::make_pair(gformula::static_intervention("all_0", 0.0, K),
                     gformula::static_intervention("all_1", 1.0, K));
  gformula::EstimateConfig ec;
  ec.seed = 7008;
  ec.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gformula::estimate_effect(data, spec, K, ivs, ec));
  }
}
BENCHMARK(BM_estimate_effect)->Arg(1)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
