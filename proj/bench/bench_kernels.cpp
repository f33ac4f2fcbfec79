// Parallel kernels against their serial twins. Run with OMP_NUM_THREADS set to
// compare thread counts; the serial variants ignore it.

#include <benchmark/benchmark.h>

#include <random>

#include "alrank/kernels.hpp"
#include "alrank/synthetic.hpp"
#include "alrank/toy_learner.hpp"

using namespace alrank;

namespace {

std::vector<FeatureVec> gaussian(std::size_t n, std::size_t dim, std::uint64_t seed) {
  auto rng = substream(seed, "bench-points");
  std::normal_distribution<double> g;
  std::vector<FeatureVec> out(n, FeatureVec(dim));
  for (auto& p : out)
    for (auto& x : p) x = g(rng);
  return out;
}

// Ensemble-scores for 256 synthetic items from a trained toy ensemble.
const std::vector<EnsembleCaptionSet>& caption_sets() {
  static const auto sets = [] {
    SyntheticConfig sc;
    sc.n_items = 256;
    sc.n_val = 1;
    const auto data = make_synthetic(sc);
    ToyLearnerConfig lc;
    lc.seed = 1;
    const auto ensemble = train_toy_ensemble(data.pool.items(), lc);
    std::vector<EnsembleCaptionSet> out;
    for (std::size_t i = 0; i < data.pool.size(); ++i)
      out.push_back(sample_captions(ensemble, data.pool.item(i), SamplingConfig{}, i));
    return out;
  }();
  return sets;
}

template <bool Parallel>
void BM_nearest_centroid(benchmark::State& state) {
  const auto pts = gaussian(static_cast<std::size_t>(state.range(0)), 16, 1);
  const auto cents = gaussian(static_cast<std::size_t>(state.range(0)) / 20, 16, 2);
  for (auto _ : state) {
    auto a = Parallel ? kernels::nearest_centroid(pts, cents) : kernels::reference::nearest_centroid(pts, cents);
    benchmark::DoNotOptimize(a.label.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_nearest_distances(benchmark::State& state) {
  const auto queries = gaussian(400, 16, 3);
  const auto refs = gaussian(static_cast<std::size_t>(state.range(0)), 16, 4);
  for (auto _ : state) {
    auto d = Parallel ? kernels::nearest_distances(queries, refs) : kernels::reference::nearest_distances(queries, refs);
    benchmark::DoNotOptimize(d.data());
  }
}

template <bool Parallel>
void BM_score_sets(benchmark::State& state) {
  const auto& sets = caption_sets();
  std::vector<const EnsembleCaptionSet*> ptrs;
  for (const auto& s : sets) ptrs.push_back(&s);
  const auto strategy = static_cast<Strategy>(state.range(0));
  for (auto _ : state) {
    auto r = Parallel ? kernels::score_sets(ptrs, strategy, 0) : kernels::reference::score_sets(ptrs, strategy, 0);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetLabel(std::string(to_string(strategy)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sets.size()));
}

}  // namespace

BENCHMARK(BM_nearest_centroid<false>)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_nearest_centroid<true>)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_nearest_distances<false>)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_nearest_distances<true>)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_score_sets<false>)
    ->Arg(static_cast<int>(Strategy::entropy_full))
    ->Arg(static_cast<int>(Strategy::divergence))
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_score_sets<true>)
    ->Arg(static_cast<int>(Strategy::entropy_full))
    ->Arg(static_cast<int>(Strategy::divergence))
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
