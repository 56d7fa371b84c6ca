#include <benchmark/benchmark.h>

#include "sigcompose/classification_index.hpp"
#include "sigcompose/evaluation.hpp"
#include "sigcompose/signal_composition.hpp"

using namespace sigcompose;

namespace {

struct Fixture {
  Dataset dataset;
  ClassificationTable table;
  QueryRange range;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SyntheticSpec spec;
    spec.clusters = 10;
    spec.funds_per_cluster = 100;
    spec.months = 128;
    Fixture out;
    out.dataset = generate_synthetic(spec);
    const auto plan = build_slice_plan(out.dataset.month_range, 6);
    TreeParams params;
    params.variability_threshold = 8.0;
    out.table = build_index(out.dataset, plan, params);
    out.range = {plan.range().first, plan.range().last};
    return out;
  }();
  return f;
}

}  // namespace

static void BM_ComposerConstruct(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    Composer composer(f.table, f.dataset);
    benchmark::DoNotOptimize(&composer);
  }
}
BENCHMARK(BM_ComposerConstruct);

static void BM_ComposeQuery(benchmark::State& state) {
  const auto& f = fixture();
  const Composer composer(f.table, f.dataset);
  const auto query = synthetic_fund_id(3, 17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(composer.compose(query, f.range));
  }
}
BENCHMARK(BM_ComposeQuery);
