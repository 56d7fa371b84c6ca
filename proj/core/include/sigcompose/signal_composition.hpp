#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sigcompose/classification_index.hpp"
#include "sigcompose/ingestion.hpp"

namespace sigcompose {

struct QueryRange {
  MonthIndex from;
  MonthIndex to;  // inclusive

  MonthRange months() const { return {from, to}; }
};

struct SimilarityResult {
  std::string fund_id;
  int counter = 0;          // slices in range where the fund shares a retained leaf with the query
  int slices_in_range = 0;
  std::optional<double> tiebreak_correlation;  // Pearson r over the query range

  friend bool operator==(const SimilarityResult&, const SimilarityResult&) = default;
};

// Plan slices lying entirely inside the range, in plan order.
std::vector<int> slices_for_range(const SlicePlan& plan, QueryRange range);

// Total result order: counter desc, correlation desc (absent last), fund_id asc.
bool ranks_before(const SimilarityResult& a, const SimilarityResult& b);

// First k results in ranking order.
std::vector<SimilarityResult> top_k(std::vector<SimilarityResult> results, std::size_t k);

// Leaf co-membership lookup built once over a table. Holds references to the
// table and dataset, which must outlive it. Read-only after construction.
class Composer {
 public:
  Composer(const ClassificationTable& table, const Dataset& dataset);

  // Every fund sharing a retained leaf with `query_fund` in at least one
  // slice of the range, ranked. Throws NotFound for a fund the dataset does
  // not know and InvalidArgument when from > to.
  std::vector<SimilarityResult> compose(const std::string& query_fund, QueryRange range) const;

  const ClassificationTable& table() const { return table_; }
  const Dataset& dataset() const { return dataset_; }

 private:
  const ClassificationTable& table_;
  const Dataset& dataset_;
  // slice -> fund -> leaf group id
  std::unordered_map<int, std::unordered_map<std::string, std::size_t>> leaf_of_;
  std::vector<std::vector<std::string>> groups_;
};

std::vector<SimilarityResult> compose(const ClassificationTable& table, const Dataset& dataset,
                                      const std::string& query_fund, QueryRange range);

}  // namespace sigcompose
