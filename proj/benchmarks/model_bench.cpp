#include <benchmark/benchmark.h>

#include "tcft/init.hpp"
#include "tcft/metrics.hpp"
#include "tcft/model.hpp"
#include "tcft/ops.hpp"
#include "tcft/rng.hpp"

namespace {

tcft::SequenceBatch random_batch(std::size_t batch, std::size_t steps, std::size_t channels,
                                 tcft::Rng& rng) {
  std::vector<double> v(batch * steps * channels);
  for (auto& x : v) x = rng.uniform();
  return {tcft::Tensor::from({batch * steps, channels}, std::move(v)), batch, steps};
}

// Args: window length, batch size.
void BM_ForwardBackward(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  const auto batch = static_cast<std::size_t>(state.range(1));
  tcft::Rng rng(1);
  tcft::TcftBedModel model(tcft::ModelConfig{});
  tcft::xavier_uniform_init(model, rng);
  const auto x = random_batch(batch, steps, model.config().input_channels, rng);
  const std::vector<double> labels(batch, 0.5);
  for (auto _ : state) {
    model.zero_grad();
    const auto loss = tcft::mse_loss(model.forward(x, {true, &rng}), labels);
    loss.backward();
    benchmark::DoNotOptimize(loss.item());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_ForwardBackward)->Args({30, 8})->Args({60, 8})->Unit(benchmark::kMillisecond);

void BM_Inference(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  tcft::Rng rng(2);
  tcft::TcftBedModel model(tcft::ModelConfig{});
  tcft::xavier_uniform_init(model, rng);
  const auto x = random_batch(64, steps, model.config().input_channels, rng);
  for (auto _ : state) {
    tcft::NoGradGuard no_grad;
    benchmark::DoNotOptimize(model.forward(x).values().data());
  }
}
BENCHMARK(BM_Inference)->Arg(30)->Arg(125)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
