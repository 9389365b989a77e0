#include <benchmark/benchmark.h>

#include "vsnit/generator.hpp"
#include "vsnit/metrics.hpp"

using namespace vsnit;

namespace {

std::vector<metrics::Triple> triples(std::size_t n) {
  auto g = GeneratorConfig::defaults();
  g.population = n;
  const auto data = generate_samples(g, 2);
  std::vector<metrics::Triple> out;
  for (const auto& s : data) {
    // Half-way hypothesis: the complete day with every other removal left out.
    auto hyp = s.complete.labels();
    for (std::size_t k = s.removed_positions.size(); k-- > 0;)
      if (k % 2 == 1) hyp.erase(hyp.begin() + static_cast<std::ptrdiff_t>(s.removed_positions[k]));
    out.push_back({s.incomplete.labels(), s.complete.labels(), std::move(hyp)});
  }
  return out;
}

void BM_Evaluate(benchmark::State& state) {
  const auto ts = triples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::evaluate(ts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(1000)->Arg(10000);

void BM_TransitionAnalysis(benchmark::State& state) {
  const auto ts = triples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::transition_analysis(ts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TransitionAnalysis)->Arg(1000)->Arg(10000);

void BM_Generate(benchmark::State& state) {
  auto g = GeneratorConfig::defaults();
  g.population = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_samples(g, 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Generate)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
