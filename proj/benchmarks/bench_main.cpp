#include <benchmark/benchmark.h>

#include <random>

#include "harrisflow/assignment.hpp"
#include "harrisflow/coupling.hpp"
#include "harrisflow/flows.hpp"
#include "harrisflow/kernels.hpp"
#include "harrisflow/transport.hpp"

using namespace hflow;

namespace {

void BM_HarrisStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CovarianceKernel k = make_kernel({"box", 1e-2});
  const std::vector<double> u = midpoints(n);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const FlowPath p = simulate_harris(k, u, {1e-4, 1e-2, seed++, false});
    benchmark::DoNotOptimize(p.positions.data());
  }
  state.SetItemsProcessed(state.iterations() * 100 * static_cast<long>(n));
}
BENCHMARK(BM_HarrisStep)->Arg(2)->Arg(16)->Arg(256);

void BM_Arratia(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> u = midpoints(n);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const FlowPath p = simulate_arratia(u, {1e-4, 1e-1, seed++, false});
    benchmark::DoNotOptimize(p.positions.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000 * static_cast<long>(n));
}
BENCHMARK(BM_Arratia)->Arg(2)->Arg(256);

void BM_GammaFromPhi(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gamma_from_phi(SmoothingKernel::bump(5e-3)));
}
BENCHMARK(BM_GammaFromPhi);

void BM_W1Real(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  std::vector<double> a(m), b(m);
  for (auto& v : a) v = x(rng);
  for (auto& v : b) v = x(rng);
  const DiscreteMeasure ma = DiscreteMeasure::uniform_on(a), mb = DiscreteMeasure::uniform_on(b);
  for (auto _ : state) benchmark::DoNotOptimize(w1_real(ma, mb));
}
BENCHMARK(BM_W1Real)->Arg(16)->Arg(256)->Arg(4096);

void BM_Assignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  CostMatrix c(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t q = 0; q < n; ++q) c(r, q) = x(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(assignment_solve(c).total_cost);
}
BENCHMARK(BM_Assignment)->Arg(16)->Arg(64)->Arg(256);

void BM_UniformTransport(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  CostMatrix c(64, 48);
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t q = 0; q < 48; ++q) c(r, q) = x(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_uniform_transport(c).mean_cost);
}
BENCHMARK(BM_UniformTransport);

void BM_Coupling(benchmark::State& state) {
  const std::vector<double> u = midpoints(4);
  const FlowPath p = simulate_arratia(u, {1e-4, 1.0, 7, true});
  for (auto _ : state) benchmark::DoNotOptimize(build_coupling(p, 1e-2).sigma.size());
}
BENCHMARK(BM_Coupling);

}  // namespace
BENCHMARK_MAIN();
