#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "gfanm/bench.hpp"
#include "gfanm/cfd.hpp"
#include "gfanm/conic.hpp"
#include "gfanm/estimator.hpp"

using namespace gfanm;

namespace {

GFilter filter_of_size(int n) { return make_allpass_cascade(std::polar(0.58, 2.0), n); }

CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  }
  return 0.5 * (m + m.adjoint());
}

}  // namespace

static void BM_Transfer(benchmark::State& state) {
  const GFilter f = filter_of_size(static_cast<int>(state.range(0)));
  double theta = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transfer(f, theta));
    theta += 1e-3;
  }
}
BENCHMARK(BM_Transfer)->Arg(4)->Arg(20)->Arg(98);

static void BM_SubspaceBasis(benchmark::State& state) {
  const GFilter f = filter_of_size(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(subspace_basis(f));
  state.SetLabel("n=" + std::to_string(state.range(0)));
}
BENCHMARK(BM_SubspaceBasis)->Arg(8)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_PsdProject(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const CMatrix m = random_hermitian(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(psd_project(m));
}
BENCHMARK(BM_PsdProject)->Arg(21)->Arg(99)->Unit(benchmark::kMicrosecond);

static void BM_RegularizedSolve(benchmark::State& state) {
  const auto sub = std::make_shared<const StructuredSubspace>(subspace_basis(filter_of_size(20)));
  std::mt19937_64 rng(2);
  const double sigma = sigma_from_snr(6.0);
  const GeneratedSignal sig = gen_signal(3, 98, 2.0, sigma, rng);
  AnmProblem p{sub, run_filter(sub->filter(), sig.y)};
  p.regularization = select_lambda(sigma, 20);
  int iters = 0;
  for (auto _ : state) iters = solve(p).iterations;
  state.counters["iterations"] = iters;
}
BENCHMARK(BM_RegularizedSolve)->Unit(benchmark::kMillisecond);

static void BM_CfDecompose(benchmark::State& state) {
  const GFilter f = filter_of_size(20);
  CMatrix sigma = CMatrix::Zero(20, 20);
  for (double theta : {1.9, 2.0, 2.1}) {
    const CVector g = transfer(f, theta);
    sigma += g * g.adjoint();
  }
  CfOptions opts;
  opts.grid_size = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cf_decompose(f, sigma, opts));
}
BENCHMARK(BM_CfDecompose)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
