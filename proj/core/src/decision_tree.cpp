#include "sigcompose/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csv.hpp"
#include "sigcompose/error.hpp"

namespace sigcompose {

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::threshold ? "threshold" : "interval";
}

SplitMode parse_split_mode(std::string_view text) {
  if (text == "threshold") return SplitMode::threshold;
  if (text == "interval") return SplitMode::interval;
  throw InvalidArgument("unknown split mode '" + std::string(text) +
                        "' (expected threshold or interval)");
}

void TreeParams::validate() const {
  if (!(complexity_penalty >= 0.0 && complexity_penalty < 1.0)) {
    throw InvalidArgument("complexity_penalty must lie in [0, 1)");
  }
  if (min_support < 2) {
    throw InvalidArgument("min_support must be at least 2, got " + std::to_string(min_support));
  }
  if (std::isnan(variability_threshold) || variability_threshold < 0.0) {
    throw InvalidArgument("variability_threshold must be non-negative");
  }
}

SplitRule SplitRule::threshold(int feature, double cut) {
  SplitRule r;
  r.feature_index = feature;
  r.kind = SplitKind::threshold;
  r.cut = cut;
  return r;
}

SplitRule SplitRule::interval(int feature, double low, double high) {
  SplitRule r;
  r.feature_index = feature;
  r.kind = SplitKind::interval;
  r.low = low;
  r.high = high;
  return r;
}

bool SplitRule::precedes(const SplitRule& other) const {
  if (feature_index != other.feature_index) return feature_index < other.feature_index;
  const double a = kind == SplitKind::threshold ? cut : low;
  const double b = other.kind == SplitKind::threshold ? other.cut : other.low;
  if (a != b) return a < b;
  return high < other.high;
}

double TreeNode::label_range() const {
  if (members.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(members.begin(), members.end(),
                                      [](const auto& a, const auto& b) { return a.label < b.label; });
  return hi->label - lo->label;
}

std::vector<const TreeNode*> DecisionTree::leaves() const {
  std::vector<const TreeNode*> out;
  for (const auto& node : nodes) {
    if (node.is_leaf()) out.push_back(&node);
  }
  return out;
}

std::size_t DecisionTree::split_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return !n.is_leaf(); }));
}

namespace {

// Midpoint that always separates a < b under the "x < cut" convention.
double separating_midpoint(double a, double b) {
  const double m = std::midpoint(a, b);
  return m > a ? m : b;
}

// Sorted view of one feature over a node's members, with prefix sums of
// centred labels so any contiguous run's SSE is O(1).
struct FeatureScan {
  std::vector<double> sorted_values;
  std::vector<double> prefix_sum;     // size n + 1
  std::vector<double> prefix_sq;      // size n + 1
  std::vector<std::size_t> bounds;    // start positions of distinct-value groups 1..t-1
  std::vector<double> midpoints;      // midpoints[i] separates group i and i + 1

  double sum(std::size_t from, std::size_t to) const { return prefix_sum[to] - prefix_sum[from]; }
  double sq(std::size_t from, std::size_t to) const { return prefix_sq[to] - prefix_sq[from]; }
};

double sse_of(double s1, double s2, std::size_t count) {
  if (count == 0) return 0.0;
  return std::max(0.0, s2 - s1 * s1 / static_cast<double>(count));
}

FeatureScan scan_feature(std::span<const SelfLabeledRecord> records,
                         const std::vector<std::size_t>& members,
                         const std::vector<double>& centred, int feature) {
  const std::size_t n = members.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto f = static_cast<std::size_t>(feature);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[members[a]].features[f] < records[members[b]].features[f];
  });

  FeatureScan scan;
  scan.sorted_values.resize(n);
  scan.prefix_sum.assign(n + 1, 0.0);
  scan.prefix_sq.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = records[members[order[i]]].features[f];
    const double c = centred[order[i]];
    scan.sorted_values[i] = v;
    scan.prefix_sum[i + 1] = scan.prefix_sum[i] + c;
    scan.prefix_sq[i + 1] = scan.prefix_sq[i] + c * c;
    if (i > 0 && v != scan.sorted_values[i - 1]) {
      scan.bounds.push_back(i);
      scan.midpoints.push_back(separating_midpoint(scan.sorted_values[i - 1], v));
    }
  }
  return scan;
}

// Calls visit(rule, inside_count, gain) for every support-satisfying
// candidate, in tie-break order.
template <typename Visit>
void for_each_candidate(const FeatureScan& scan, int feature, SplitMode mode, double sse_parent,
                        std::size_t min_support, Visit&& visit) {
  const std::size_t n = scan.sorted_values.size();
  const double total_sum = scan.prefix_sum[n];
  const double total_sq = scan.prefix_sq[n];
  const std::size_t t = scan.midpoints.size();

  if (mode == SplitMode::threshold) {
    for (std::size_t g = 0; g < t; ++g) {
      const std::size_t in = scan.bounds[g];
      if (in < min_support || n - in < min_support) continue;
      const double s_in = scan.sum(0, in);
      const double q_in = scan.sq(0, in);
      const double gain = sse_parent - sse_of(s_in, q_in, in) -
                          sse_of(total_sum - s_in, total_sq - q_in, n - in);
      visit(SplitRule::threshold(feature, scan.midpoints[g]), in, gain);
    }
    return;
  }

  for (std::size_t lo = 0; lo < t; ++lo) {
    for (std::size_t hi = lo + 1; hi < t; ++hi) {
      const std::size_t begin = scan.bounds[lo];
      const std::size_t end = scan.bounds[hi];
      const std::size_t in = end - begin;
      if (in < min_support || n - in < min_support) continue;
      const double s_in = scan.sum(begin, end);
      const double q_in = scan.sq(begin, end);
      const double gain = sse_parent - sse_of(s_in, q_in, in) -
                          sse_of(total_sum - s_in, total_sq - q_in, n - in);
      visit(SplitRule::interval(feature, scan.midpoints[lo], scan.midpoints[hi]), in, gain);
    }
  }
}

struct ChosenSplit {
  SplitRule rule;
  double gain = 0.0;
};

std::optional<ChosenSplit> best_split(std::span<const SelfLabeledRecord> records,
                                      const std::vector<std::size_t>& members,
                                      const TreeParams& params, std::size_t width) {
  const std::size_t n = members.size();
  const auto min_support = static_cast<std::size_t>(params.min_support);
  if (n < 2 * min_support) return std::nullopt;

  double mean = 0.0;
  for (auto i : members) mean += records[i].label;
  mean /= static_cast<double>(n);
  std::vector<double> centred(n);
  double sse_parent = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    centred[i] = records[members[i]].label - mean;
    sse_parent += centred[i] * centred[i];
  }
  if (sse_parent <= 0.0) return std::nullopt;

  std::vector<FeatureScan> scans;
  scans.reserve(width);
  for (std::size_t f = 0; f < width; ++f) {
    scans.push_back(scan_feature(records, members, centred, static_cast<int>(f)));
  }

  // Pass 1: the best gain. Pass 2: the first candidate (in tie-break order)
  // whose gain is within the tie band of it.
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < width; ++f) {
    for_each_candidate(scans[f], static_cast<int>(f), params.split_mode, sse_parent, min_support,
                       [&](const SplitRule&, std::size_t, double gain) { best = std::max(best, gain); });
  }
  if (!std::isfinite(best)) return std::nullopt;

  const double tie_band = kGainTieTolerance * sse_parent;
  std::optional<ChosenSplit> chosen;
  for (std::size_t f = 0; f < width && !chosen; ++f) {
    for_each_candidate(scans[f], static_cast<int>(f), params.split_mode, sse_parent, min_support,
                       [&](const SplitRule& rule, std::size_t, double gain) {
                         if (!chosen && gain >= best - tie_band) chosen = ChosenSplit{rule, gain};
                       });
  }
  if (!chosen || chosen->gain <= tie_band) return std::nullopt;
  return chosen;
}

std::vector<TreeMember> members_of(std::span<const SelfLabeledRecord> records,
                                   const std::vector<std::size_t>& indices) {
  std::vector<TreeMember> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back({records[i].fund_id, records[i].label});
  return out;
}

}  // namespace

std::vector<SplitRule> split_candidates(std::span<const double> values, int feature_index,
                                        SplitMode mode) {
  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> mids;
  for (std::size_t i = 1; i < distinct.size(); ++i) {
    mids.push_back(separating_midpoint(distinct[i - 1], distinct[i]));
  }

  std::vector<SplitRule> out;
  if (mode == SplitMode::threshold) {
    for (double m : mids) out.push_back(SplitRule::threshold(feature_index, m));
  } else {
    for (std::size_t lo = 0; lo < mids.size(); ++lo) {
      for (std::size_t hi = lo + 1; hi < mids.size(); ++hi) {
        out.push_back(SplitRule::interval(feature_index, mids[lo], mids[hi]));
      }
    }
  }
  return out;
}

DecisionTree fit_tree(std::span<const SelfLabeledRecord> records, const TreeParams& params) {
  params.validate();
  if (records.size() < static_cast<std::size_t>(params.min_support)) {
    throw InvalidArgument("fit_tree needs at least " + std::to_string(params.min_support) +
                          " records, got " + std::to_string(records.size()));
  }
  const std::size_t width = records.front().features.size();
  for (const auto& r : records) {
    if (r.features.size() != width) throw InvalidArgument("records have differing feature lengths");
  }

  DecisionTree tree;
  tree.slice_id = records.front().slice_id;
  tree.params = params;

  std::vector<std::size_t> all(records.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  {
    double mean = 0.0;
    for (const auto& r : records) mean += r.label;
    mean /= static_cast<double>(records.size());
    for (const auto& r : records) tree.sse_root += (r.label - mean) * (r.label - mean);
  }

  std::vector<std::vector<std::size_t>> node_members;
  tree.nodes.push_back({"S" + std::to_string(tree.slice_id), members_of(records, all), {}, -1, -1, false});
  node_members.push_back(std::move(all));

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    auto split = best_split(records, node_members[i], params, width);
    if (!split || !(split->gain > params.complexity_penalty * tree.sse_root)) continue;

    std::vector<std::size_t> in;
    std::vector<std::size_t> out;
    const auto f = static_cast<std::size_t>(split->rule.feature_index);
    for (auto r : node_members[i]) {
      (split->rule.inside(records[r].features[f]) ? in : out).push_back(r);
    }

    const std::string base = tree.nodes[i].name;
    tree.nodes[i].rule = split->rule;
    tree.nodes[i].inside = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({base + "/in", members_of(records, in), {}, -1, -1, false});
    node_members.push_back(std::move(in));
    tree.nodes[i].outside = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({base + "/out", members_of(records, out), {}, -1, -1, false});
    node_members.push_back(std::move(out));
  }
  return tree;
}

const std::string& locate_leaf(const DecisionTree& tree, std::span<const double> features) {
  const TreeNode* node = &tree.root();
  while (!node->is_leaf()) {
    const auto f = static_cast<std::size_t>(node->rule->feature_index);
    if (f >= features.size()) throw InvalidArgument("feature vector shorter than tree rules require");
    node = &tree.nodes[static_cast<std::size_t>(node->rule->inside(features[f]) ? node->inside
                                                                                : node->outside)];
  }
  return node->name;
}

DecisionTree prune_noisy(DecisionTree tree, double variability_threshold) {
  if (std::isnan(variability_threshold)) throw InvalidArgument("variability threshold is NaN");
  for (auto& node : tree.nodes) {
    node.pruned = node.is_leaf() && node.label_range() > variability_threshold;
  }
  return tree;
}

namespace {

void dump_node(const DecisionTree& tree, std::size_t index, int depth, std::ostream& out) {
  const auto& node = tree.nodes[index];
  double lo = 0.0;
  double hi = 0.0;
  if (!node.members.empty()) {
    auto [a, b] = std::minmax_element(node.members.begin(), node.members.end(),
                                      [](const auto& x, const auto& y) { return x.label < y.label; });
    lo = a->label;
    hi = b->label;
  }
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << node.name
      << " n=" << node.members.size() << " label_range=" << detail::format_number(lo) << ".."
      << detail::format_number(hi);
  if (node.rule) {
    const auto& r = *node.rule;
    out << " rule: f" << r.feature_index;
    if (r.kind == SplitKind::threshold) {
      out << " threshold " << detail::format_number(r.cut);
    } else {
      out << " interval " << detail::format_number(r.low) << ' ' << detail::format_number(r.high);
    }
  }
  if (node.pruned) out << " PRUNED";
  out << '\n';
  if (!node.is_leaf()) {
    dump_node(tree, static_cast<std::size_t>(node.inside), depth + 1, out);
    dump_node(tree, static_cast<std::size_t>(node.outside), depth + 1, out);
  }
}

}  // namespace

void dump_tree(const DecisionTree& tree, std::ostream& out) {
  if (!tree.nodes.empty()) dump_node(tree, 0, 0, out);
}

}  // namespace sigcompose
