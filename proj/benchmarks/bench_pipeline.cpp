#include <benchmark/benchmark.h>

#include "vocovar/analysis.hpp"
#include "vocovar/graph.hpp"
#include "vocovar/marginals.hpp"
#include "vocovar/simulator.hpp"

using namespace vocovar;

namespace {

ScenarioSpec scene(int keyframes) {
  ScenarioSpec spec;
  spec.kind = TrajectoryKind::Revisit;
  spec.keyframes = keyframes;
  spec.landmarks = 60 * keyframes;
  spec.noise_sigma = 1.0;
  spec.covis_span = 2;
  spec.seed = 7;
  return spec;
}

struct Prepared {
  FactorGraph graph;
  Values values;
  SpMat info;
  std::vector<int> ordering;
};

Prepared prepare(int keyframes) {
  auto [ds, gt] = simulate_scenario(scene(keyframes));
  auto [graph, init] = build_graph(ds);
  Prepared out{std::move(graph), std::move(init), {}, {}};
  out.info = information_matrix(linearize(out.graph, out.values));
  out.ordering = default_elimination_ordering(out.graph, out.info);
  return out;
}

}  // namespace

static void BM_Linearize(benchmark::State& state) {
  const Prepared p = prepare(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(linearize(p.graph, p.values));
  }
  state.SetLabel(std::to_string(p.info.rows()) + " scalar vars");
}
BENCHMARK(BM_Linearize)->Arg(8)->Arg(16)->Arg(24);

static void BM_SparseCholesky(benchmark::State& state) {
  const Prepared p = prepare(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sparse_cholesky(p.info, p.ordering));
  }
  state.SetLabel(std::to_string(p.info.rows()) + " scalar vars");
}
BENCHMARK(BM_SparseCholesky)->Arg(8)->Arg(16)->Arg(24);

static void BM_RecoverNewestPose(benchmark::State& state) {
  const Prepared p = prepare(static_cast<int>(state.range(0)));
  const auto sri = sparse_cholesky(p.info, p.ordering);
  int newest = 0;
  for (const auto& key : p.graph.layout.order) {
    if (key.kind == VarKind::Pose) newest = std::max(newest, key.id);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        recover_marginals(sri, p.graph.layout, {pose_key(newest)}));
  }
}
BENCHMARK(BM_RecoverNewestPose)->Arg(8)->Arg(16)->Arg(24);

static void BM_RecoverAllPoses(benchmark::State& state) {
  const Prepared p = prepare(static_cast<int>(state.range(0)));
  const auto sri = sparse_cholesky(p.info, p.ordering);
  std::vector<VarKey> poses;
  for (const auto& key : p.graph.layout.order) {
    if (key.kind == VarKind::Pose) poses.push_back(key);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(recover_marginals(sri, p.graph.layout, poses));
  }
}
BENCHMARK(BM_RecoverAllPoses)->Arg(8)->Arg(16)->Arg(24);

static void BM_DenseInverseOracle(benchmark::State& state) {
  const Prepared p = prepare(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dense_inverse_oracle(p.info));
  }
}
BENCHMARK(BM_DenseInverseOracle)->Arg(8)->Arg(16);

static void BM_GaussNewtonSolve(benchmark::State& state) {
  auto [ds, gt] = simulate_scenario(scene(static_cast<int>(state.range(0))));
  auto [graph, init] = build_graph(ds);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gauss_newton_solve(graph, init));
  }
}
BENCHMARK(BM_GaussNewtonSolve)->Arg(8)->Arg(16);

static void BM_TrendSeries(benchmark::State& state) {
  auto [ds, gt] = simulate_scenario(scene(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(trend_series(ds));
  }
}
BENCHMARK(BM_TrendSeries)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
