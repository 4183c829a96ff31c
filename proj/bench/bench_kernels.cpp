// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.
#include "toric/solver.hpp"
#include "toric/stability.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace toric;

namespace {

Exec mode(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_StabilityScan(benchmark::State& state) {
  const Polytope P = standard_polytope("hirzebruch");
  const TargetFunction K = extremal_affine(P).target();
  ScanOptions opt;
  opt.angles = 90;
  opt.offsets = 64;
  opt.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(scan_uniform_stability(P, K, opt).lambda_est);
}

void BM_DiscreteGradient(benchmark::State& state) {
  const Polytope P = standard_polytope("square");
  DiscreteAbreu d(P, 64);
  d.set_target([](const Vec2&) { return 4.0; }, true);
  std::vector<double> q(d.unknowns());
  for (int k = 0; k < d.unknowns(); ++k) q[k] = 1e-2 * std::exp(-(d.points()[k] - Vec2(0.5, 0.5)).squaredNorm() / 0.045);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d.F(q, mode(state)));
    benchmark::DoNotOptimize(d.gradient(q, mode(state)).data());
  }
}

void BM_SampleField(benchmark::State& state) {
  const Polytope P = standard_polytope("simplex");
  const auto v = guillemin(P);
  const GridSpec g = polytope_grid(P, 128, 0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        sample_field(P, g, 0.01, [&](const Vec2& p) { return abreu_scalar(*v, p); }, mode(state)).values.data());
}

}  // namespace

BENCHMARK(BM_StabilityScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiscreteGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleField)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
