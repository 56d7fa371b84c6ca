#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sigcompose/ingestion.hpp"
#include "sigcompose/month.hpp"

namespace sigcompose {

struct Slice {
  int slice_id = 0;
  MonthIndex start;
  int length = 0;

  MonthIndex end() const { return start + length; }  // exclusive
  friend bool operator==(const Slice&, const Slice&) = default;
};

// Contiguous, non-overlapping windows covering a month range in order.
struct SlicePlan {
  std::vector<Slice> slices;

  MonthRange range() const;
  const Slice* find(int slice_id) const;
  friend bool operator==(const SlicePlan&, const SlicePlan&) = default;
};

// One complete window of one fund, labelled with the sum of its returns.
struct SelfLabeledRecord {
  std::string fund_id;
  int slice_id = 0;
  std::vector<double> features;
  double label = 0.0;
};

// Cuts `range` into windows of nominal_length months. A trailing remainder
// is absorbed into the last window, so 128 months at length 6 gives twenty
// 6-month windows and one 8-month window. A range shorter than one nominal
// window becomes a single window. Throws InvalidArgument for ranges under
// two months or nominal_length < 2.
SlicePlan build_slice_plan(MonthRange range, int nominal_length = 6);

// Left-to-right sum. Throws InvalidArgument on an empty window.
double label_of(std::span<const double> features);

// A fund contributes to a slice only when every month of the slice is
// present in its series. Records within a slice are ordered by fund_id.
std::map<int, std::vector<SelfLabeledRecord>> slice_and_label(const Dataset& dataset,
                                                              const SlicePlan& plan);

// Records for a single slice.
std::vector<SelfLabeledRecord> label_slice(const Dataset& dataset, const Slice& slice);

}  // namespace sigcompose
