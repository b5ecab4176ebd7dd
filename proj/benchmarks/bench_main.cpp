#include <benchmark/benchmark.h>

#include <random>

#include "radsearch/planner.hpp"
#include "radsearch/radiation.hpp"
#include "radsearch/scene.hpp"
#include "radsearch/survey.hpp"

using namespace radsearch;

namespace {

const scene::Scene& big_scene() {
  static const scene::Scene s = [] {
    scene::SceneParams p;
    p.width = 458;
    p.height = 440;
    Rng rng = make_rng(1);
    return scene::generate_scene(p, rng);
  }();
  return s;
}

void BM_AstarFullScene(benchmark::State& state) {
  const scene::Scene& s = big_scene();
  const planner::PlanGrid grid(s.labels, s.dem);
  const GeoTransform& gt = s.labels.transform();
  const Cell a = gt.world_to_cell(s.start.x, s.start.y);
  const Cell b = gt.world_to_cell(s.source_site.x, s.source_site.y);
  const auto h = static_cast<planner::Heuristic>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(planner::astar(grid, {}, a, b, {h}));
}
BENCHMARK(BM_AstarFullScene)
    ->Arg(static_cast<int>(planner::Heuristic::euclidean))
    ->Arg(static_cast<int>(planner::Heuristic::zero))
    ->Unit(benchmark::kMillisecond);

void BM_PlanGridBuild(benchmark::State& state) {
  const scene::Scene& s = big_scene();
  for (auto _ : state) benchmark::DoNotOptimize(planner::PlanGrid(s.labels, s.dem));
}
BENCHMARK(BM_PlanGridBuild)->Unit(benchmark::kMillisecond);

void BM_DistanceTransform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 g(5);
  std::bernoulli_distribution b(0.05);
  Mask m(n, n, 0);
  for (auto& v : m.cells()) v = b(g);
  for (auto _ : state) benchmark::DoNotOptimize(planner::distance_transform(m));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_DistanceTransform)->Arg(64)->Arg(256)->Arg(512);

void BM_Mission2Survey(benchmark::State& state) {
  const survey::Scenario sc = survey::mission2_scenario();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Rng rng = make_rng(seed++);
    benchmark::DoNotOptimize(survey::run_survey(sc.plan, sc.detector, sc.sources, rng));
  }
}
BENCHMARK(BM_Mission2Survey)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
