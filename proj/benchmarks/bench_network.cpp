#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "adrmtl/network.hpp"
#include "adrmtl/trainer.hpp"

using namespace adrmtl;

namespace {

std::vector<Eigen::VectorXd> random_inputs(std::size_t n, int dim,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t t = 0; t < n; ++t) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = dist(rng);
    out.push_back(std::move(v));
  }
  return out;
}

GoldLabels random_gold(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, kNumTags - 1);
  GoldLabels gold;
  for (std::size_t t = 0; t < n; ++t) {
    gold.tags.push_back(static_cast<Tag>(dist(rng)));
  }
  gold.ade_label = 1;
  return gold;
}

void BM_Forward(benchmark::State& state) {
  int d_h = static_cast<int>(state.range(0));
  std::size_t n = static_cast<std::size_t>(state.range(1));
  ModelParams params = init_params(d_h, kNumTags, 50, 1, 1);
  auto inputs = random_inputs(n, 50, 2);
  std::vector<bool> mask(n, true);
  for (auto _ : state) {
    ForwardTrace trace = bilstm_forward(params, inputs, mask);
    benchmark::DoNotOptimize(trace.ade_dist);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_ForwardBackward(benchmark::State& state) {
  int d_h = static_cast<int>(state.range(0));
  std::size_t n = static_cast<std::size_t>(state.range(1));
  ModelParams params = init_params(d_h, kNumTags, 50, 1, 1);
  auto inputs = random_inputs(n, 50, 2);
  GoldLabels gold = random_gold(n, 3);
  std::vector<bool> mask(n, true);
  for (auto _ : state) {
    ForwardTrace trace = bilstm_forward(params, inputs, mask);
    ModelParams grads = backward(params, trace, LossKind::Joint, gold, 0.8);
    benchmark::DoNotOptimize(grads.adr_bias);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_AdamStep(benchmark::State& state) {
  int d_h = static_cast<int>(state.range(0));
  ModelParams params = init_params(d_h, kNumTags, 50, 1, 1);
  ModelParams grads = init_params(d_h, kNumTags, 50, 1, 2);
  OptimizerState opt = make_optimizer_state(params);
  for (auto _ : state) {
    adam_step(params, grads, opt, 0.001);
    benchmark::DoNotOptimize(params.adr_bias);
  }
}

}  // namespace

BENCHMARK(BM_Forward)
    ->Args({50, 20})
    ->Args({100, 20})
    ->Args({100, 40})
    ->Args({500, 40});
BENCHMARK(BM_ForwardBackward)
    ->Args({50, 20})
    ->Args({100, 20})
    ->Args({100, 40});
BENCHMARK(BM_AdamStep)->Arg(50)->Arg(100)->Arg(500);

BENCHMARK_MAIN();
