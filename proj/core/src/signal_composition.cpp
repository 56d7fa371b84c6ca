#include "sigcompose/signal_composition.hpp"

#include <algorithm>
#include <map>

#include "sigcompose/correlation.hpp"
#include "sigcompose/error.hpp"

namespace sigcompose {

std::vector<int> slices_for_range(const SlicePlan& plan, QueryRange range) {
  std::vector<int> ids;
  for (const auto& s : plan.slices) {
    if (range.from <= s.start && s.end().value - 1 <= range.to.value) ids.push_back(s.slice_id);
  }
  return ids;
}

bool ranks_before(const SimilarityResult& a, const SimilarityResult& b) {
  if (a.counter != b.counter) return a.counter > b.counter;
  if (a.tiebreak_correlation.has_value() != b.tiebreak_correlation.has_value()) {
    return a.tiebreak_correlation.has_value();
  }
  if (a.tiebreak_correlation && *a.tiebreak_correlation != *b.tiebreak_correlation) {
    return *a.tiebreak_correlation > *b.tiebreak_correlation;
  }
  return a.fund_id < b.fund_id;
}

std::vector<SimilarityResult> top_k(std::vector<SimilarityResult> results, std::size_t k) {
  std::stable_sort(results.begin(), results.end(), ranks_before);
  if (results.size() > k) results.resize(k);
  return results;
}

Composer::Composer(const ClassificationTable& table, const Dataset& dataset)
    : table_(table), dataset_(dataset) {
  const ClassificationRow* previous = nullptr;
  for (const auto& row : table.rows) {
    if (!previous || previous->slice_id != row.slice_id || previous->node_name != row.node_name) {
      groups_.emplace_back();
    }
    groups_.back().push_back(row.fund_id);
    leaf_of_[row.slice_id][row.fund_id] = groups_.size() - 1;
    previous = &row;
  }
}

std::vector<SimilarityResult> Composer::compose(const std::string& query_fund, QueryRange range) const {
  if (range.to < range.from) throw InvalidArgument("query range 'to' precedes 'from'");
  if (!dataset_.contains(query_fund)) throw NotFound("unknown fund " + query_fund);

  const auto slices = slices_for_range(table_.manifest.plan, range);
  std::map<std::string, int> counters;
  for (int slice : slices) {
    auto by_fund = leaf_of_.find(slice);
    if (by_fund == leaf_of_.end()) continue;
    auto leaf = by_fund->second.find(query_fund);
    if (leaf == by_fund->second.end()) continue;
    for (const auto& fund : groups_[leaf->second]) {
      if (fund != query_fund) ++counters[fund];
    }
  }

  const auto* query_series = dataset_.find_series(query_fund);
  std::vector<SimilarityResult> results;
  results.reserve(counters.size());
  for (const auto& [fund, counter] : counters) {
    SimilarityResult r{fund, counter, static_cast<int>(slices.size()), std::nullopt};
    const auto* other = dataset_.find_series(fund);
    if (query_series && other) r.tiebreak_correlation = pearson(*query_series, *other, range.months()).r;
    results.push_back(std::move(r));
  }
  std::sort(results.begin(), results.end(), ranks_before);
  return results;
}

std::vector<SimilarityResult> compose(const ClassificationTable& table, const Dataset& dataset,
                                      const std::string& query_fund, QueryRange range) {
  return Composer(table, dataset).compose(query_fund, range);
}

}  // namespace sigcompose
