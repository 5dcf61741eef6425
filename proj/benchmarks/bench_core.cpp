#include <benchmark/benchmark.h>

#include "bhp/error.hpp"
#include "bhp/geom_graph.hpp"
#include "bhp/hops.hpp"
#include "bhp/point_process.hpp"
#include "bhp/renorm.hpp"

using namespace bhp;

namespace {

PointSet users(double half_width) { return sample_poisson(4.0, Window::cube(2, half_width), 7); }

void BM_SamplePoisson(benchmark::State& state) {
  const Window w = Window::cube(2, static_cast<double>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_poisson(4.0, w, ++seed));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(4.0 * w.volume()));
}
BENCHMARK(BM_SamplePoisson)->Arg(25)->Arg(100);

void BM_BuildGraph(benchmark::State& state) {
  const PointSet pts = users(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(GeometricGraph(pts, 1.0));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}
BENCHMARK(BM_BuildGraph)->Arg(25)->Arg(100);

void BM_Clusters(benchmark::State& state) {
  const GeometricGraph g(users(static_cast<double>(state.range(0))), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(clusters(g));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_Clusters)->Arg(25)->Arg(100);

void BM_HopField(benchmark::State& state) {
  const Window w = Window::cube(2, 60.0);
  const GeometricGraph g(sample_poisson(4.0, w, 1), 1.0);
  const PointSet stations = sample_poisson(0.004, w, 2);
  const auto k = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hop_field(g, stations, k));
}
BENCHMARK(BM_HopField)->Arg(5)->Arg(50);

void BM_ChemicalDistance(benchmark::State& state) {
  const PointSet pts = users(40.0);
  const GeometricGraph g(pts, 1.0);
  const ClusterLabeling lab = clusters(g);
  const double a[] = {-20.0, 0.0}, b[] = {20.0, 0.0};
  const std::size_t ia = nearest_cluster_point(pts, lab, a), ib = nearest_cluster_point(pts, lab, b);
  for (auto _ : state) benchmark::DoNotOptimize(chemical_distance(g, ia, ib));
}
BENCHMARK(BM_ChemicalDistance);

void BM_ClassifySites(benchmark::State& state) {
  const double lambda = 200.0;
  const double eps = epsilon_of_lambda(lambda, 2);
  const SiteBox box = SiteBox::segment(2, state.range(0), 4);
  const double s = 1.0 - eps;
  const double lo[] = {s * box.lo[0] - 0.5, s * box.lo[1] - 0.5};
  const double hi[] = {s * box.hi[0] + 0.5, s * box.hi[1] + 0.5};
  const PointSet pts = sample_poisson(lambda, Window::from_bounds(lo, hi), 3);
  for (auto _ : state) benchmark::DoNotOptimize(classify_sites(pts, eps, box));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(box.size()));
}
BENCHMARK(BM_ClassifySites)->Arg(20)->Arg(80);

void BM_BadDecomposition(benchmark::State& state) {
  const double lambda = 200.0;
  const double eps = epsilon_of_lambda(lambda, 2);
  const SiteBox box = SiteBox::segment(2, state.range(0), 6);
  const SiteGrid grid = classify_poisson(lambda, eps, box, 5);
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(bad_decomposition(grid, state.range(0)));
    } catch (const Error&) {
    }
  }
}
BENCHMARK(BM_BadDecomposition)->Arg(74)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
