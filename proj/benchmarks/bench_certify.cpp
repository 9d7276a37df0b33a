#include <benchmark/benchmark.h>

#include <cpcert/coupling.hpp>
#include <cpcert/extremal.hpp>
#include <cpcert/modular.hpp>

using namespace cpcert;

namespace {

const Tolerance kTol{};

std::shared_ptr<const AlgebraModel> full_block(Index n) {
  return std::make_shared<const AlgebraModel>(AlgebraModel::build(AlgebraSpec{{Block{n, 1}}}));
}

DensityState state_for(Index n, std::uint64_t seed) {
  return make_density(random_density(n, seed, 5e-2), kTol);
}

void bm_extremality_cp(benchmark::State& state) {
  const Index n = state.range(0);
  const Index d = state.range(1);
  auto alg = full_block(n);
  const KrausChannel ch = random_channel(alg, d, 1, kTol);
  for (auto _ : state) benchmark::DoNotOptimize(extremality_cp(ch, kTol).verdict);
}
BENCHMARK(bm_extremality_cp)->Args({2, 2})->Args({3, 3})->Args({4, 4})->Args({6, 3});

void bm_minimal_kraus(benchmark::State& state) {
  const Index n = state.range(0);
  auto alg = full_block(n);
  // redundant family: every Kraus duplicated
  const KrausChannel base = random_channel(alg, 2, 2, kTol);
  std::vector<Mat> dup;
  for (const Mat& v : base.kraus()) {
    dup.push_back(v / std::sqrt(2.0));
    dup.push_back(v / std::sqrt(2.0));
  }
  const KrausChannel redundant(alg, dup, "dup", kTol);
  for (auto _ : state) benchmark::DoNotOptimize(minimal_kraus(redundant, kTol).kraus_count());
}
BENCHMARK(bm_minimal_kraus)->Arg(2)->Arg(4)->Arg(6);

void bm_coupling_roundtrip(benchmark::State& state) {
  const Index n = state.range(0);
  auto alg = full_block(n);
  const DensityState phi = state_for(n, 3);
  const KrausChannel tau = random_phi_channel(alg, phi, 3, 4, kTol);
  for (auto _ : state) {
    const CouplingState d = channel_to_coupling(tau, phi, kTol);
    benchmark::DoNotOptimize(coupling_to_channel(alg, d, phi, kTol).kraus_count());
  }
}
BENCHMARK(bm_coupling_roundtrip)->Arg(2)->Arg(3)->Arg(4);

void bm_adjoint_duality(benchmark::State& state) {
  const Index n = state.range(0);
  auto alg = full_block(n);
  const DensityState phi = state_for(n, 5);
  const ModularData md = ModularData::build(alg, phi, kTol);
  const KrausChannel tau = random_phi_channel(alg, phi, 2, 6, kTol);
  for (auto _ : state) {
    const KrausChannel adj = adjoint_channel(md, tau, kTol);
    benchmark::DoNotOptimize(duality_defect(md, tau, adj));
  }
}
BENCHMARK(bm_adjoint_duality)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
