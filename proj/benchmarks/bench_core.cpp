#include <benchmark/benchmark.h>

#include <random>

#include "adello/data.hpp"
#include "adello/flexda.hpp"
#include "adello/mlp.hpp"
#include "adello/trainer.hpp"

namespace {

adello::Matrix random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  adello::Matrix m(rows, cols);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& x : m.data) x = n(rng);
  return m;
}

void BM_Softmax(benchmark::State& state) {
  const adello::Vec logits{1.2, -0.4, 0.0, 2.1, -1.7};
  for (auto _ : state) benchmark::DoNotOptimize(adello::softmax(logits));
}
BENCHMARK(BM_Softmax);

void BM_Forward(benchmark::State& state) {
  const auto model = adello::Classifier::init(2, 32, 5, 42);
  const auto x = random_batch(static_cast<std::size_t>(state.range(0)), 2, 7);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
}
BENCHMARK(BM_Forward)->Arg(64)->Arg(128);

void BM_LossGradients(benchmark::State& state) {
  const auto model = adello::Classifier::init(2, 32, 5, 42);
  const std::size_t B = static_cast<std::size_t>(state.range(0));
  const auto x = random_batch(B, 2, 7);
  adello::BatchTargets bt;
  bt.targets = adello::Matrix(B, 5);
  for (std::size_t r = 0; r < B; ++r) bt.targets(r, r % 5) = 1.0;
  bt.offsets = adello::Matrix(B, 5);
  bt.weights = adello::Vec(B, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(adello::loss_gradients(model, x, bt));
}
BENCHMARK(BM_LossGradients)->Arg(64)->Arg(128);

void BM_TrainStep(benchmark::State& state) {
  const auto task = adello::make_task(2, 5, 2.5, 1.0, 7);
  adello::LongTailSpec lt;
  const auto split = adello::sample_split(task, lt, 50, 11);
  adello::TrainConfig cfg;
  cfg.t_total = 1;
  cfg.eval_interval = 1 << 30;
  cfg.t_warmup = 0;
  for (auto _ : state) benchmark::DoNotOptimize(adello::run(cfg, split, task));
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
