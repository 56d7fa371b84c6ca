#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "sigcompose/error.hpp"
#include "sigcompose/ingestion.hpp"
#include "sigcompose/self_labeling.hpp"
#include "support/oracles.hpp"

using namespace sigcompose;

namespace {

MonthRange months(int first, int count) { return {MonthIndex{first}, MonthIndex{first + count - 1}}; }

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_returns(in);
}

}  // namespace

TEST(SlicePlan, FullHistoryGivesTwentyOneSlices) {
  const auto plan = build_slice_plan({parse_month("2000-01"), parse_month("2010-08")}, 6);
  ASSERT_EQ(plan.slices.size(), 21u);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(plan.slices[i].slice_id, i);
    EXPECT_EQ(plan.slices[i].length, 6);
    EXPECT_EQ(plan.slices[i].start.value, 6 * i);
  }
  EXPECT_EQ(plan.slices[20].length, 8);
  EXPECT_EQ(plan.slices[20].start.value, 120);
  EXPECT_EQ(plan.range(), months(0, 128));
}

TEST(SlicePlan, EvenDivision) {
  const auto plan = build_slice_plan(months(0, 12), 6);
  ASSERT_EQ(plan.slices.size(), 2u);
  EXPECT_EQ(plan.slices[0].length, 6);
  EXPECT_EQ(plan.slices[1].length, 6);
}

TEST(SlicePlan, RemainderAbsorbed) {
  const auto plan = build_slice_plan(months(0, 13), 6);
  ASSERT_EQ(plan.slices.size(), 2u);
  EXPECT_EQ(plan.slices[0].length, 6);
  EXPECT_EQ(plan.slices[1].length, 7);
}

TEST(SlicePlan, ShortRangeIsOneSlice) {
  const auto plan = build_slice_plan(months(3, 4), 6);
  ASSERT_EQ(plan.slices.size(), 1u);
  EXPECT_EQ(plan.slices[0].length, 4);
  EXPECT_EQ(plan.slices[0].start.value, 3);
}

TEST(SlicePlan, RejectsDegenerateInput) {
  EXPECT_THROW(build_slice_plan(months(0, 1), 6), InvalidArgument);
  EXPECT_THROW(build_slice_plan(months(0, 12), 1), InvalidArgument);
  EXPECT_THROW(build_slice_plan({MonthIndex{5}, MonthIndex{2}}, 6), InvalidArgument);
}

TEST(SlicePlan, FindById) {
  const auto plan = build_slice_plan(months(0, 24), 6);
  ASSERT_NE(plan.find(3), nullptr);
  EXPECT_EQ(plan.find(3)->start.value, 18);
  EXPECT_EQ(plan.find(4), nullptr);
}

TEST(SlicePlanProperty, CoverageAndLengths) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> n_d(2, 400), h_d(2, 24), start_d(0, 50);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = n_d(rng), h = h_d(rng), start = start_d(rng);
    const auto plan = build_slice_plan(months(start, n), h);
    int expected_start = start, total = 0;
    for (std::size_t i = 0; i < plan.slices.size(); ++i) {
      const auto& s = plan.slices[i];
      ASSERT_EQ(s.slice_id, static_cast<int>(i));
      ASSERT_EQ(s.start.value, expected_start);
      if (n >= h) {
        ASSERT_GE(s.length, h);
        ASSERT_LT(s.length, 2 * h);
        if (i + 1 < plan.slices.size()) ASSERT_EQ(s.length, h);
      }
      expected_start += s.length;
      total += s.length;
    }
    ASSERT_EQ(total, n) << "n=" << n << " h=" << h;
    ASSERT_EQ(plan.slices.size(), static_cast<std::size_t>(n >= h ? n / h : 1));
  }
}

TEST(Label, SumsTheWindow) {
  const std::vector<double> w{0.63, 1.26};
  EXPECT_NEAR(label_of(w), oracle::naive_sum(w), 1e-12);
  EXPECT_NEAR(label_of(w), 1.89, 1e-12);
  const std::vector<double> one{-3.5};
  EXPECT_EQ(label_of(one), -3.5);
  EXPECT_THROW(label_of(std::vector<double>{}), InvalidArgument);
}

TEST(LabelProperty, MatchesExtendedPrecisionSum) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(-30.0, 30.0);
  std::uniform_int_distribution<int> len(1, 12);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<double> w(len(rng));
    for (auto& x : w) x = v(rng);
    ASSERT_NEAR(label_of(w), oracle::naive_sum(w), 1e-12);
  }
}

TEST(SliceAndLabel, CompleteWindowsOnly) {
  // F1 complete; F2 misses month 3 (slice 0) but is complete in slice 1.
  const auto d = parse(
      "fund_id,2000-01,2000-02,2000-03,2000-04,2000-05,2000-06,2000-07,2000-08,2000-09,2000-10,2000-11,2000-12\n"
      "F1,1,-2,0.5,0.5,1,-1,0,0,0,0,0,0\n"
      "F2,1,1,1,,1,1,2,2,2,2,2,2\n");
  const auto plan = build_slice_plan(d.month_range, 6);
  const auto labelled = slice_and_label(d, plan);
  ASSERT_EQ(labelled.at(0).size(), 1u);
  EXPECT_EQ(labelled.at(0)[0].fund_id, "F1");
  EXPECT_NEAR(labelled.at(0)[0].label, 0.0, 1e-12);
  EXPECT_EQ(labelled.at(0)[0].features, (std::vector<double>{1, -2, 0.5, 0.5, 1, -1}));
  ASSERT_EQ(labelled.at(1).size(), 2u);
  EXPECT_EQ(labelled.at(1)[0].fund_id, "F1");
  EXPECT_EQ(labelled.at(1)[0].label, 0.0);
  EXPECT_EQ(labelled.at(1)[1].fund_id, "F2");
  EXPECT_EQ(labelled.at(1)[1].label, 12.0);
}

TEST(SliceAndLabel, FullHistoryFundInEverySlice) {
  std::string text = "fund_id";
  for (int m = 0; m < 128; ++m) text += "," + format_month(MonthIndex{m});
  text += "\nF1";
  for (int m = 0; m < 128; ++m) text += "," + std::to_string(m % 5);
  text += "\n";
  const auto d = parse(text);
  const auto plan = build_slice_plan(d.month_range, 6);
  const auto labelled = slice_and_label(d, plan);
  ASSERT_EQ(labelled.size(), 21u);
  for (const auto& [slice, records] : labelled) {
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(static_cast<int>(records[0].features.size()), plan.find(slice)->length);
    EXPECT_NEAR(records[0].label, oracle::naive_sum(records[0].features), 1e-12);
  }
}

TEST(SliceAndLabel, RecordsOrderedById) {
  const auto d = parse("fund_id,2000-01,2000-02\nZ,1,1\nA,2,2\nM,3,3\n");
  const auto records = label_slice(d, Slice{0, MonthIndex{0}, 2});
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].fund_id, "A");
  EXPECT_EQ(records[1].fund_id, "M");
  EXPECT_EQ(records[2].fund_id, "Z");
}
