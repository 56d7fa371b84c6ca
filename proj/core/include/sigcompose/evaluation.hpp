#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sigcompose/classification_index.hpp"
#include "sigcompose/correlation.hpp"
#include "sigcompose/signal_composition.hpp"

namespace sigcompose {

// Clustered factor-model returns: fund (c, i) at month m returns
// factor_c(m) + noise(c, i, m), both Gaussian with the given volatilities.
// Intra-cluster r is factor_vol^2 / (factor_vol^2 + noise_vol^2); the
// defaults give about 0.7.
struct SyntheticSpec {
  int clusters = 5;
  int funds_per_cluster = 20;
  int months = 60;
  double factor_volatility = 3.0;
  double noise_volatility = 1.96;
  std::uint64_t seed = 42;
  Epoch epoch;
  MonthIndex start;

  void validate() const;  // throws InvalidArgument
};

// Name of the random source, recorded in evaluation reports.
inline constexpr const char* kSyntheticGenerator = "mt19937_64+box-muller";

// Series and metadata for every synthetic fund. Ids encode the cluster
// (see synthetic_cluster_of). Identical specs give identical datasets.
Dataset generate_synthetic(const SyntheticSpec& spec);

std::string synthetic_fund_id(int cluster, int index);  // 1-based, e.g. "C01F007"
std::optional<int> synthetic_cluster_of(const std::string& fund_id);

using ClusterOf = std::function<std::optional<int>(const std::string&)>;

// Share of the first k results in the query's cluster. With fewer than k
// results the denominator is the result count; no results gives 0.
double precision_at_k(const std::vector<SimilarityResult>& results, const std::string& query_fund,
                      const ClusterOf& cluster_of, std::size_t k);

// Tree settings used by the evaluation harness unless overridden. The
// variability threshold is looser than the tree default: with six-month sums
// of noise at the default synthetic volatility, 2.0 prunes most leaves.
TreeParams default_eval_params();

struct EvalConfig {
  SyntheticSpec spec;
  TreeParams params = default_eval_params();
  int slice_length = 6;
  std::size_t k = 5;
  std::size_t correlation_top = 3;  // results per query averaged for the mean-r comparison
  std::size_t random_pairs = 3;     // random other funds per query for the baseline r
};

struct QueryEvaluation {
  std::string query_fund;
  std::vector<SimilarityResult> results;  // top k
  double precision = 0.0;
};

struct EvalReport {
  EvalConfig config;
  IndexStats stats;
  std::vector<QueryEvaluation> queries;
  double mean_precision = 0.0;
  double mean_r_top = 0.0;     // pooled over (query, top result) pairs with defined r
  double mean_r_random = 0.0;  // pooled over (query, random fund) pairs with defined r
  double baseline_precision = 0.0;
  bool near_baseline = false;

  double r_margin() const { return mean_r_top - mean_r_random; }
};

// Generate, build, query every fund over the full plan range, and score.
EvalReport run_evaluation(const EvalConfig& config);

// Per-query CSV (query,rank,fund_id,counter,r,cluster_match) framed by
// '#'-prefixed settings and a key=value aggregate block.
void write_eval_report(const EvalReport& report, std::ostream& out);

}  // namespace sigcompose
