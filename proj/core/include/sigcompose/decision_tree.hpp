#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sigcompose/self_labeling.hpp"

namespace sigcompose {

enum class SplitMode { threshold, interval };

std::string_view to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view text);  // throws InvalidArgument

struct TreeParams {
  // A split is kept only when its SSE reduction, as a fraction of the root
  // SSE, exceeds this value. Range [0, 1).
  double complexity_penalty = 0.0;
  // Smallest allowed node membership.
  int min_support = 2;
  SplitMode split_mode = SplitMode::threshold;
  // Leaves whose label range (max - min, percent points) exceeds this are pruned.
  double variability_threshold = 2.0;

  void validate() const;  // throws InvalidArgument
  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

enum class SplitKind { threshold, interval };

// Two-way split on one feature. "Inside" is x < cut (threshold) or
// low <= x < high (interval); everything else is "outside".
struct SplitRule {
  int feature_index = 0;
  SplitKind kind = SplitKind::threshold;
  double cut = 0.0;
  double low = 0.0;
  double high = 0.0;

  static SplitRule threshold(int feature, double cut);
  static SplitRule interval(int feature, double low, double high);

  bool inside(double value) const {
    return kind == SplitKind::threshold ? value < cut : (low <= value && value < high);
  }
  // Tie-break order among equal gains: feature, then cut/low, then high.
  bool precedes(const SplitRule& other) const;
  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

struct TreeMember {
  std::string fund_id;
  double label = 0.0;
  friend bool operator==(const TreeMember&, const TreeMember&) = default;
};

struct TreeNode {
  std::string name;
  std::vector<TreeMember> members;
  std::optional<SplitRule> rule;
  int inside = -1;  // child node indices into DecisionTree::nodes
  int outside = -1;
  bool pruned = false;

  bool is_leaf() const { return !rule.has_value(); }
  double label_range() const;  // max - min member label
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Regression tree over one slice. nodes[0] is the root; children always
// follow their parent in `nodes`.
struct DecisionTree {
  int slice_id = 0;
  std::vector<TreeNode> nodes;
  TreeParams params;
  double sse_root = 0.0;

  const TreeNode& root() const { return nodes.front(); }
  std::vector<const TreeNode*> leaves() const;
  std::size_t split_count() const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

// Relative width of the band inside which two split gains count as tied.
inline constexpr double kGainTieTolerance = 1e-9;

// Midpoints between consecutive distinct values (threshold mode), or every
// ordered pair of those midpoints (interval mode).
std::vector<SplitRule> split_candidates(std::span<const double> values, int feature_index,
                                        SplitMode mode);

// Greedy SSE-reduction growth. Root is named "S<slice_id>"; children append
// "/in" and "/out". Throws InvalidArgument when there are fewer records than
// min_support or feature lengths differ.
DecisionTree fit_tree(std::span<const SelfLabeledRecord> records, const TreeParams& params);

// Name of the leaf reached by following the rules from the root.
const std::string& locate_leaf(const DecisionTree& tree, std::span<const double> features);

// Marks every leaf whose label range exceeds the threshold as pruned.
DecisionTree prune_noisy(DecisionTree tree, double variability_threshold);

// Indented text, one node per line:
//   <name> n=<members> label_range=<lo>..<hi> [rule: f<idx> <kind> <params>] [PRUNED]
void dump_tree(const DecisionTree& tree, std::ostream& out);

}  // namespace sigcompose
