#include <benchmark/benchmark.h>

#include "incaapa/filters.hpp"
#include "incaapa/linalg.hpp"
#include "incaapa/network.hpp"
#include "incaapa/random.hpp"
#include "incaapa/theory.hpp"

using namespace incaapa;

namespace {

CMatrix random_matrix(Xoshiro256& rng, Eigen::Index rows, Eigen::Index cols) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_gaussian(1.0);
  }
  return m;
}

void BM_NodeUpdate(benchmark::State& state) {
  const auto L = static_cast<std::size_t>(state.range(0));
  const auto T = static_cast<std::size_t>(state.range(1));
  Xoshiro256 rng(7);
  const CMatrix X = random_matrix(rng, static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(T));
  const CVector d = random_matrix(rng, static_cast<Eigen::Index>(T), 1).col(0);
  CVector h = CVector::Zero(static_cast<Eigen::Index>(L));
  CVector g = CVector::Zero(static_cast<Eigen::Index>(L));
  UpdateWorkspace ws(L, T);
  for (auto _ : state) {
    ws.apply(h, g, 1e-3, 1e-3, X, d);
    benchmark::DoNotOptimize(h.data());
  }
}
BENCHMARK(BM_NodeUpdate)->Args({4, 1})->Args({4, 2})->Args({4, 8})->Args({16, 4});

void BM_TrialReferenceSetup(benchmark::State& state) {
  const NetworkConfig cfg = NetworkConfig::reference_setup(SignalKind::NoncircularARMA, 1);
  TrialOptions opts;
  opts.noncooperative = false;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto curves = simulate_trial(cfg, static_cast<std::size_t>(state.range(0)), ++seed, opts);
    benchmark::DoNotOptimize(curves);
  }
}
BENCHMARK(BM_TrialReferenceSetup)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_MomentEstimation(benchmark::State& state) {
  SignalModel model;
  model.kind = SignalKind::NoncircularARMA;
  MomentOptions opts;
  opts.samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    ++opts.seed;
    benchmark::DoNotOptimize(estimate_moments(model, opts));
  }
}
BENCHMARK(BM_MomentEstimation)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_PredictMsd(benchmark::State& state) {
  const NetworkConfig cfg = NetworkConfig::reference_setup(SignalKind::NoncircularARMA, 1);
  MomentOptions opts;
  opts.samples = 2000;
  std::vector<MomentSet> moments;
  for (std::size_t k = 0; k < cfg.nodes; ++k) {
    opts.seed = k + 1;
    opts.node = k;
    moments.push_back(estimate_moments(cfg.signals[k], opts));
  }
  for (auto _ : state) benchmark::DoNotOptimize(predict_msd(cfg, moments, {}));
}
BENCHMARK(BM_PredictMsd)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
