#pragma once

#include <compare>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sigcompose/decision_tree.hpp"
#include "sigcompose/ingestion.hpp"
#include "sigcompose/self_labeling.hpp"

namespace sigcompose {

// One fund's membership of one retained leaf.
struct ClassificationRow {
  int slice_id = 0;
  std::string node_name;
  std::string fund_id;

  friend auto operator<=>(const ClassificationRow&, const ClassificationRow&) = default;
};

struct IndexManifest {
  SlicePlan plan;
  TreeParams params;
  std::string fingerprint;  // dataset_fingerprint() of the source data

  friend bool operator==(const IndexManifest&, const IndexManifest&) = default;
};

// The table of classification results. Rows are sorted by
// (slice_id, node_name, fund_id) and unique.
struct ClassificationTable {
  std::vector<ClassificationRow> rows;
  IndexManifest manifest;

  friend bool operator==(const ClassificationTable&, const ClassificationTable&) = default;
};

struct IndexStats {
  std::size_t row_count = 0;
  std::size_t slices_covered = 0;
  std::size_t funds_covered = 0;
  std::map<int, std::size_t> leaves_per_slice;

  friend bool operator==(const IndexStats&, const IndexStats&) = default;
};

inline constexpr const char* kIndexMagic = "SIGCOMPOSE-INDEX";
inline constexpr const char* kIndexVersion = "v1";

// Fits and prunes one tree per slice. Slices with fewer complete records
// than min_support are skipped (and logged). Slices run on `threads`
// workers; 0 picks the hardware concurrency. Output is ordered by slice.
std::vector<DecisionTree> build_trees(const Dataset& dataset, const SlicePlan& plan,
                                      const TreeParams& params, unsigned threads = 0);

// Rows for every retained leaf membership of the given trees.
ClassificationTable table_from_trees(const std::vector<DecisionTree>& trees, IndexManifest manifest);

ClassificationTable build_index(const Dataset& dataset, const SlicePlan& plan,
                                const TreeParams& params, unsigned threads = 0);

void save_index(const ClassificationTable& table, std::ostream& out);
ClassificationTable load_index(std::istream& in);  // throws IndexFormatError

void save_index_file(const ClassificationTable& table, const std::string& path);
ClassificationTable load_index_file(const std::string& path);

IndexStats index_stats(const ClassificationTable& table);

// Throws FingerprintMismatch unless the table was built from `dataset`.
void check_fingerprint(const ClassificationTable& table, const Dataset& dataset);

}  // namespace sigcompose
