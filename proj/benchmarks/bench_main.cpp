#include <benchmark/benchmark.h>

#include "mgs/diffusion/eps_model.hpp"
#include "mgs/eval/metrics.hpp"
#include "mgs/guidance/guidance.hpp"
#include "mgs/manifold/model.hpp"
#include "mgs/nn/network.hpp"

using namespace mgs;

namespace {

nn::FeedforwardNet net(Eigen::Index in, Eigen::Index out, Pcg32& rng) {
  return nn::FeedforwardNet::make({in, 128, 128, 128, out},
                                  {nn::Activation::relu, nn::Activation::relu, nn::Activation::relu,
                                   nn::Activation::identity},
                                  rng);
}

void BM_ForwardBackward(benchmark::State& state) {
  Pcg32 rng(1);
  auto f = net(18, 2, rng);
  Matrix x = rng.normal_matrix(state.range(0), 18);
  Matrix up = rng.normal_matrix(state.range(0), 2);
  for (auto _ : state) {
    auto cache = f.forward_cached(x);
    benchmark::DoNotOptimize(f.backward(cache, up));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(256);

void BM_GuidanceGradient(benchmark::State& state) {
  Pcg32 rng(2);
  auto s = diffusion::make_linear_schedule(1000);
  diffusion::EpsModel eps(net(18, 2, rng), 16);
  manifold::ManifoldTrainConfig mc;
  auto h = manifold::make_manifold_model(2, mc, rng);
  const Eigen::Index n = state.range(0);
  Matrix x = rng.normal_matrix(n, 2);
  Matrix target = h.relations(rng.normal_matrix(n, 2));
  guidance::GuidanceConfig cfg;
  cfg.lambda = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(guidance::guidance_gradient(x, 900, eps, h, target, s, cfg));
}
BENCHMARK(BM_GuidanceGradient)->Arg(8)->Arg(32)->Arg(64);

void BM_NeighborCounts(benchmark::State& state) {
  Pcg32 rng(3);
  Matrix real = rng.normal_matrix(1000, 2);
  Matrix gen = rng.normal_matrix(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(eval::neighbor_counts(real, gen, 0.1));
}
BENCHMARK(BM_NeighborCounts)->Arg(512)->Arg(2048);

void BM_SlicedWasserstein(benchmark::State& state) {
  Pcg32 rng(4);
  Matrix a = rng.normal_matrix(2048, 2), b = rng.normal_matrix(1000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(eval::sliced_wasserstein(a, b, 128, 5));
}
BENCHMARK(BM_SlicedWasserstein);

}  // namespace
BENCHMARK_MAIN();
