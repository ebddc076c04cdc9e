#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "caplab/fraenkel.hpp"
#include "caplab/level_surface.hpp"
#include "caplab/solver.hpp"

using namespace caplab;

namespace {

ImplicitDomain ellipsoid() {
  return make_star_domain(ellipsoid_graph(Vec3(1.2, 1.0, 1.0)), Vec3::Zero());
}

GridResolution res_for(int ns) { return {ns, ns * 3 / 8, ns * 3 / 4}; }

}  // namespace

static void BM_BuildGrid(benchmark::State& state) {
  const ImplicitDomain dom = ellipsoid();
  const GridResolution res = res_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_grid(dom, 38.4, res).node_count());
}
BENCHMARK(BM_BuildGrid)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_SolveAnnulus(benchmark::State& state) {
  auto g = std::make_shared<const AnnularGrid>(
      build_grid(ellipsoid(), 38.4, res_for(static_cast<int>(state.range(0)))));
  for (auto _ : state) {
    PotentialField p = solve_annulus(g, 1.0, {});
    benchmark::DoNotOptimize(p.values().data());
  }
}
BENCHMARK(BM_SolveAnnulus)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_ExtractLevelSurface(benchmark::State& state) {
  auto g = std::make_shared<const AnnularGrid>(build_grid(ellipsoid(), 38.4, res_for(32)));
  const PotentialField p =
      potential_from_values(g, g->sample([](const Vec3& x) { return std::log(x.norm()); }));
  for (auto _ : state) {
    const LevelSurface s = extract_level_surface(*p.field, 1.0);
    benchmark::DoNotOptimize(s.vertices.size());
  }
}
BENCHMARK(BM_ExtractLevelSurface)->Unit(benchmark::kMillisecond);

static void BM_Fraenkel(benchmark::State& state) {
  const ImplicitDomain dom = ellipsoid();
  for (auto _ : state) benchmark::DoNotOptimize(fraenkel_asymmetry(dom).alpha);
}
BENCHMARK(BM_Fraenkel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
