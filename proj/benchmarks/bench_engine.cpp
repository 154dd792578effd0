#include <benchmark/benchmark.h>

#include <random>

#include "evseq/eventbox.hpp"
#include "evseq/grouping.hpp"
#include "evseq/query.hpp"
#include "evseq/synthetic.hpp"
#include "evseq/transforms.hpp"

using namespace evseq;

namespace {

DatasetPtr clinic(std::size_t n) {
  SyntheticConfig c;
  c.n_sequences = n;
  c.seed = 17;
  return generate_synthetic(c);
}

void BM_Quartiles(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> val(0, 1);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = val(rng);
  for (auto _ : state) benchmark::DoNotOptimize(quartiles(v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Quartiles)->RangeMultiplier(10)->Range(100, 1000000)->Complexity();

void BM_Align(benchmark::State& state) {
  const auto ds = clinic(static_cast<std::size_t>(state.range(0)));
  const AnchorSpec spec{{{"arrival", AnchorStrength::hard}, {"consult", AnchorStrength::hard}, {"scan", AnchorStrength::soft}}};
  for (auto _ : state) benchmark::DoNotOptimize(align(*ds, spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds->occurrence_count()));
}
BENCHMARK(BM_Align)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Cluster(benchmark::State& state) {
  const auto ds = clinic(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cluster(*ds, 15));
}
BENCHMARK(BM_Cluster)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_EventBox(benchmark::State& state) {
  const auto ds = clinic(static_cast<std::size_t>(state.range(0)));
  const auto sel = SelectionSet::all(*ds);
  EventBoxConfig cfg;
  cfg.b = std::string(kDayOfWeek);
  cfg.s_h = "urgency";
  for (auto _ : state) benchmark::DoNotOptimize(build_eventbox(*ds, sel, "consult", cfg));
}
BENCHMARK(BM_EventBox)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Query(benchmark::State& state) {
  const auto ds = clinic(static_cast<std::size_t>(state.range(0)));
  const auto clusters = cluster(*ds, 4);
  const auto q = parse_query("(Cluster ID = C1) AND (age > 50) OR NOT HAS scan", ds->schema());
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_query(*q, *ds, &clusters));
}
BENCHMARK(BM_Query)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
