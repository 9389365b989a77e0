#include <benchmark/benchmark.h>

#include "vsnit/decoding.hpp"
#include "vsnit/generator.hpp"
#include "vsnit/ops.hpp"
#include "vsnit/trainer.hpp"

using namespace vsnit;

namespace {

ModelConfig config_for(std::int64_t d_model, bool vsn) {
  ModelConfig c = vsn ? ModelConfig{} : ModelConfig::baseline();
  c.d_model = static_cast<std::size_t>(d_model);
  return c;
}

const std::vector<RecoverySample>& samples() {
  static const auto data = [] {
    auto g = GeneratorConfig::defaults();
    g.population = 64;
    return generate_samples(g, 1);
  }();
  return data;
}

void BM_ForwardBackward(benchmark::State& state) {
  VsnitModel model(config_for(state.range(0), state.range(1) != 0));
  const auto ex = train::make_example(samples()[3], {});
  for (auto _ : state) {
    model.parameters().zero_grad();
    const auto loss = model.insertion_loss(ex.state, ex.targets);
    nn::backward(loss);
    benchmark::DoNotOptimize(loss.value()[0]);
  }
}
BENCHMARK(BM_ForwardBackward)->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_DecoderForward(benchmark::State& state) {
  VsnitModel model(config_for(state.range(0), state.range(1) != 0));
  const auto s = DecoderState::from_sequence(samples()[3].incomplete);
  for (auto _ : state) benchmark::DoNotOptimize(model.decoder_forward(s));
}
BENCHMARK(BM_DecoderForward)->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Recover(benchmark::State& state) {
  VsnitModel model(config_for(64, true));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(recover(samples()[i % samples().size()].incomplete, model));
    ++i;
  }
}
BENCHMARK(BM_Recover)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  train::TrainConfig tc;
  tc.batch_size = 32;
  tc.max_steps = 1u << 30;
  train::Trainer trainer(VsnitModel(config_for(64, state.range(0) != 0)), tc);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step(samples()));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
