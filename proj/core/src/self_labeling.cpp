#include "sigcompose/self_labeling.hpp"

#include "sigcompose/error.hpp"

namespace sigcompose {

MonthRange SlicePlan::range() const {
  if (slices.empty()) return {};
  return {slices.front().start, MonthIndex{slices.back().end().value - 1}};
}

const Slice* SlicePlan::find(int slice_id) const {
  for (const auto& s : slices) {
    if (s.slice_id == slice_id) return &s;
  }
  return nullptr;
}

SlicePlan build_slice_plan(MonthRange range, int nominal_length) {
  if (nominal_length < 2) {
    throw InvalidArgument("slice length must be at least 2, got " + std::to_string(nominal_length));
  }
  const int total = range.length();
  if (total < 2) {
    throw InvalidArgument("slice plan range must span at least 2 months, got " +
                          std::to_string(total));
  }

  SlicePlan plan;
  const int full = total / nominal_length;
  if (full == 0) {
    plan.slices.push_back({0, range.first, total});
    return plan;
  }
  for (int i = 0; i < full; ++i) {
    plan.slices.push_back({i, range.first + i * nominal_length, nominal_length});
  }
  plan.slices.back().length += total % nominal_length;
  return plan;
}

double label_of(std::span<const double> features) {
  if (features.empty()) throw InvalidArgument("cannot label an empty window");
  double sum = 0.0;
  for (double v : features) sum += v;
  return sum;
}

std::vector<SelfLabeledRecord> label_slice(const Dataset& dataset, const Slice& slice) {
  std::vector<SelfLabeledRecord> records;
  for (const auto& [id, series] : dataset.series) {
    std::vector<double> features;
    features.reserve(static_cast<std::size_t>(slice.length));
    auto it = series.returns.lower_bound(slice.start);
    for (MonthIndex m = slice.start; m < slice.end(); m = m + 1, ++it) {
      if (it == series.returns.end() || it->first != m) break;
      features.push_back(it->second);
    }
    if (features.size() != static_cast<std::size_t>(slice.length)) continue;
    const double label = label_of(features);
    records.push_back({id, slice.slice_id, std::move(features), label});
  }
  return records;
}

std::map<int, std::vector<SelfLabeledRecord>> slice_and_label(const Dataset& dataset,
                                                              const SlicePlan& plan) {
  std::map<int, std::vector<SelfLabeledRecord>> out;
  for (const auto& slice : plan.slices) out.emplace(slice.slice_id, label_slice(dataset, slice));
  return out;
}

}  // namespace sigcompose
