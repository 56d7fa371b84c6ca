// Independent reference implementations and generators shared by the unit
// and acceptance suites. Nothing here calls into the library code under test
// except for plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "sigcompose/classification_index.hpp"
#include "sigcompose/decision_tree.hpp"
#include "sigcompose/self_labeling.hpp"

namespace oracle {

// Sum in extended precision.
inline double naive_sum(const std::vector<double>& xs) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < xs.size(); ++i) total += static_cast<long double>(xs[i]);
  return static_cast<double>(total);
}

// Textbook two-pass Pearson r; nullopt when a side is constant.
inline std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const long double n = static_cast<long double>(a.size());
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return std::nullopt;
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

inline long double sse(const std::vector<double>& labels) {
  if (labels.empty()) return 0.0L;
  long double mean = 0;
  for (double v : labels) mean += v;
  mean /= static_cast<long double>(labels.size());
  long double total = 0;
  for (double v : labels) total += (v - mean) * (v - mean);
  return total;
}

struct Candidate {
  int feature = 0;
  bool interval = false;
  double a = 0.0;  // cut, or low
  double b = 0.0;  // high
  bool inside(double x) const { return interval ? (a <= x && x < b) : x < a; }
};

struct RootSplit {
  Candidate candidate;
  double gain = 0.0;
};

// Exhaustive search for the root split: every candidate on every feature,
// scored by SSE reduction, with the documented tie band and gate.
inline std::optional<RootSplit> best_root_split(const std::vector<sigcompose::SelfLabeledRecord>& records,
                                                const sigcompose::TreeParams& params) {
  const int h = static_cast<int>(records.front().features.size());
  std::vector<double> all;
  for (const auto& r : records) all.push_back(r.label);
  const long double parent = sse(all);

  std::vector<Candidate> candidates;
  for (int f = 0; f < h; ++f) {
    std::set<double> distinct;
    for (const auto& r : records) distinct.insert(r.features[f]);
    std::vector<double> mids;
    double prev = 0.0;
    bool first = true;
    for (double v : distinct) {
      if (!first) {
        double m = (prev + v) / 2.0;
        if (!(m > prev)) m = v;  // adjacent doubles
        mids.push_back(m);
      }
      prev = v;
      first = false;
    }
    if (params.split_mode == sigcompose::SplitMode::threshold) {
      for (double m : mids) candidates.push_back({f, false, m, 0.0});
    } else {
      for (std::size_t i = 0; i < mids.size(); ++i)
        for (std::size_t j = i + 1; j < mids.size(); ++j) candidates.push_back({f, true, mids[i], mids[j]});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.feature, x.a, x.b) < std::tie(y.feature, y.a, y.b);
  });

  std::vector<std::pair<Candidate, long double>> scored;
  for (const auto& c : candidates) {
    std::vector<double> in, out;
    for (const auto& r : records) (c.inside(r.features[c.feature]) ? in : out).push_back(r.label);
    if (static_cast<int>(in.size()) < params.min_support || static_cast<int>(out.size()) < params.min_support)
      continue;
    scored.emplace_back(c, parent - sse(in) - sse(out));
  }
  if (scored.empty()) return std::nullopt;
  long double best = scored.front().second;
  for (const auto& s : scored) best = std::max(best, s.second);
  const long double band = sigcompose::kGainTieTolerance * parent;
  for (const auto& s : scored) {
    if (s.second >= best - band) {
      if (s.second <= band) return std::nullopt;
      if (s.second <= params.complexity_penalty * parent) return std::nullopt;
      return RootSplit{s.first, static_cast<double>(s.second)};
    }
  }
  return std::nullopt;
}

inline bool same_rule(const Candidate& c, const sigcompose::SplitRule& rule) {
  if (c.feature != rule.feature_index) return false;
  if (c.interval) return rule.kind == sigcompose::SplitKind::interval && rule.low == c.a && rule.high == c.b;
  return rule.kind == sigcompose::SplitKind::threshold && rule.cut == c.a;
}

// Random records for tree properties. Features are drawn from a coarse grid
// half the time so that ties in values and gains actually occur.
inline std::vector<sigcompose::SelfLabeledRecord> random_records(std::mt19937_64& rng, int count, int h) {
  std::uniform_real_distribution<double> cont(-5.0, 5.0);
  std::uniform_int_distribution<int> grid(-3, 3);
  const bool coarse = std::bernoulli_distribution(0.5)(rng);
  const bool label_is_sum = std::bernoulli_distribution(0.5)(rng);
  std::vector<sigcompose::SelfLabeledRecord> out;
  for (int i = 0; i < count; ++i) {
    sigcompose::SelfLabeledRecord r;
    r.fund_id = "F" + std::to_string(100 + i);
    for (int f = 0; f < h; ++f) r.features.push_back(coarse ? grid(rng) * 0.5 : cont(rng));
    if (label_is_sum) {
      double s = 0;
      for (double x : r.features) s += x;
      r.label = s;
    } else {
      r.label = coarse ? grid(rng) : cont(rng) * 4.0;
    }
    out.push_back(std::move(r));
  }
  return out;
}

// Violations of the support and partition invariants; empty when clean.
inline std::vector<std::string> structure_violations(const sigcompose::DecisionTree& tree) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (static_cast<int>(n.members.size()) < tree.params.min_support)
      out.push_back(n.name + " below min_support");
    if (n.is_leaf()) continue;
    if (n.inside < 0 || n.outside < 0 || n.inside >= static_cast<int>(tree.nodes.size()) ||
        n.outside >= static_cast<int>(tree.nodes.size())) {
      out.push_back(n.name + " bad child index");
      continue;
    }
    std::multiset<std::string> parent, kids;
    for (const auto& m : n.members) parent.insert(m.fund_id);
    for (const auto& m : tree.nodes[n.inside].members) kids.insert(m.fund_id);
    for (const auto& m : tree.nodes[n.outside].members) kids.insert(m.fund_id);
    if (parent != kids) out.push_back(n.name + " children do not partition parent");
    if (tree.nodes[n.inside].name != n.name + "/in" || tree.nodes[n.outside].name != n.name + "/out")
      out.push_back(n.name + " child naming");
  }
  return out;
}

// Nested-loop co-membership count: for every other fund, the number of
// slices in `slices` where some node holds both it and `query`.
inline std::map<std::string, int> co_membership(const std::vector<sigcompose::ClassificationRow>& rows,
                                                const std::string& query, const std::set<int>& slices) {
  std::map<std::string, int> counts;
  for (int s : slices) {
    std::set<std::string> mates;
    for (const auto& q : rows) {
      if (q.slice_id != s || q.fund_id != query) continue;
      for (const auto& g : rows) {
        if (g.slice_id == s && g.node_name == q.node_name && g.fund_id != query) mates.insert(g.fund_id);
      }
    }
    for (const auto& g : mates) ++counts[g];
  }
  return counts;
}

}  // namespace oracle
