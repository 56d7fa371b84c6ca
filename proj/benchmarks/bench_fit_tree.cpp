#include <benchmark/benchmark.h>

#include "sigcompose/decision_tree.hpp"
#include "sigcompose/evaluation.hpp"
#include "sigcompose/self_labeling.hpp"

using namespace sigcompose;

namespace {

std::vector<SelfLabeledRecord> slice_records(int funds) {
  SyntheticSpec spec;
  spec.clusters = 10;
  spec.funds_per_cluster = funds / spec.clusters;
  spec.months = 6;
  const auto dataset = generate_synthetic(spec);
  return label_slice(dataset, Slice{0, MonthIndex{0}, 6});
}

}  // namespace

static void BM_FitTreeThreshold(benchmark::State& state) {
  const auto records = slice_records(static_cast<int>(state.range(0)));
  TreeParams params;
  params.split_mode = SplitMode::threshold;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_tree(records, params));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitTreeThreshold)->RangeMultiplier(4)->Range(100, 6400)->Complexity();

static void BM_FitTreeInterval(benchmark::State& state) {
  const auto records = slice_records(static_cast<int>(state.range(0)));
  TreeParams params;
  params.split_mode = SplitMode::interval;
  params.complexity_penalty = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_tree(records, params));
  }
}
BENCHMARK(BM_FitTreeInterval)->RangeMultiplier(2)->Range(100, 800);

static void BM_SliceAndLabel(benchmark::State& state) {
  SyntheticSpec spec;
  spec.clusters = 20;
  spec.funds_per_cluster = 50;
  spec.months = 128;
  const auto dataset = generate_synthetic(spec);
  const auto plan = build_slice_plan(dataset.month_range, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(slice_and_label(dataset, plan));
  }
}
BENCHMARK(BM_SliceAndLabel);
