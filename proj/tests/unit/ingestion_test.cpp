#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "sigcompose/error.hpp"
#include "sigcompose/ingestion.hpp"
#include "support/temp_dir.hpp"

using namespace sigcompose;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_returns(in);
}

std::map<std::string, FundMeta> meta(const std::string& text) {
  std::istringstream in(text);
  return parse_meta(in);
}

const char* kMetaHeader =
    "fund_id,name,category,domicile,management_fee,performance_fee,redemption_fee,sharpe_ratio,"
    "ret_1m,ret_3m,ret_6m,ret_1y,ret_3y\n";

std::string parse_error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ParseReturns, MapsCellsAndGaps) {
  const auto d = parse("fund_id,2000-01,2000-02,2000-03\nF1,1.0,,-2.0\n");
  ASSERT_EQ(d.series.size(), 1u);
  const auto& s = d.series.at("F1").returns;
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.at(MonthIndex{0}), 1.0);
  EXPECT_EQ(s.at(MonthIndex{2}), -2.0);
  EXPECT_EQ(s.count(MonthIndex{1}), 0u);
  EXPECT_EQ(d.month_range, (MonthRange{MonthIndex{0}, MonthIndex{2}}));
}

TEST(ParseReturns, HeaderOffsetFromEpoch) {
  const auto d = parse("fund_id,2001-11,2001-12,2002-01\nF1,1,2,3\n");
  EXPECT_EQ(d.month_range.first.value, 22);
  EXPECT_EQ(d.series.at("F1").returns.at(MonthIndex{24}), 3.0);
}

TEST(ParseReturns, ArityError) {
  const auto msg = parse_error_of("fund_id,2000-01,2000-02,2000-03\nF1,1.0,1.0\n");
  EXPECT_NE(msg.find("expected 3 returns, got 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(ParseReturns, DuplicateFund) {
  const auto msg = parse_error_of("fund_id,2000-01\nF1,1\nF2,2\nF1,3\n");
  EXPECT_NE(msg.find("duplicate fund F1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
}

TEST(ParseReturns, NonNumericCellNamesLine) {
  try {
    parse("fund_id,2000-01,2000-02\nF1,1,2\nF2,x,2\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseReturns, RejectsBadHeaders) {
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("fund_id,2000-01,2000-03\nF1,1,2\n"), ParseError);
  EXPECT_THROW(parse("id,2000-01\nF1,1\n"), ParseError);
  EXPECT_THROW(parse("fund_id,2000-01,garbage\nF1,1,2\n"), ParseError);
}

TEST(ParseReturns, RejectsNonFiniteAndEmptyIds) {
  EXPECT_THROW(parse("fund_id,2000-01\nF1,inf\n"), ParseError);
  EXPECT_THROW(parse("fund_id,2000-01\nF1,nan\n"), ParseError);
  EXPECT_THROW(parse("fund_id,2000-01\n,1\n"), ParseError);
}

TEST(ParseReturns, AcceptsCrlfAndQuotedIds) {
  const auto d = parse("fund_id,2000-01,2000-02\r\n\"Fund, A\",1,2\r\n");
  ASSERT_EQ(d.series.count("Fund, A"), 1u);
  EXPECT_EQ(d.series.at("Fund, A").returns.size(), 2u);
}

TEST(ParseMeta, NumericFieldsAndAbsence) {
  const auto m = meta(std::string(kMetaHeader) + "F1,Alpha,Multi-strategy,Cayman,1,20,,,0.5,,,,\n");
  const auto& f = m.at("F1");
  EXPECT_EQ(f.name, "Alpha");
  EXPECT_EQ(f.management_fee, 1.0);
  EXPECT_EQ(f.performance_fee, 20.0);
  EXPECT_FALSE(f.redemption_fee.has_value());
  EXPECT_FALSE(f.sharpe_ratio.has_value());
  EXPECT_EQ(f.trailing_returns.m1, 0.5);
  EXPECT_FALSE(f.trailing_returns.y3.has_value());
}

TEST(ParseMeta, RejectsNonNumericFee) {
  EXPECT_THROW(meta(std::string(kMetaHeader) + "F1,A,c,d,1,abc,,,,,,,\n"), ParseError);
}

TEST(ParseMeta, RejectsDuplicateId) {
  EXPECT_THROW(meta(std::string(kMetaHeader) + "F1,A,,,,,,,,,,,\nF1,B,,,,,,,,,,,\n"), ParseError);
}

TEST(ParseMeta, ExtraColumnsKeepOrder) {
  const auto m = meta("fund_id,SkyRank Rate,name,Base Currency\nF1,4,Alpha,USD\n");
  const auto& f = m.at("F1");
  EXPECT_EQ(f.name, "Alpha");
  ASSERT_EQ(f.extra_fields.size(), 2u);
  EXPECT_EQ(f.extra_fields[0], (std::pair<std::string, std::string>{"SkyRank Rate", "4"}));
  EXPECT_EQ(f.extra_fields[1], (std::pair<std::string, std::string>{"Base Currency", "USD"}));
}

TEST(ParseMeta, ColumnsInAnyOrder) {
  const auto m = meta("name,fund_id,sharpe_ratio\n\"Beta, Ltd\",F9,1.25\n");
  EXPECT_EQ(m.at("F9").name, "Beta, Ltd");
  EXPECT_EQ(m.at("F9").sharpe_ratio, 1.25);
}

TEST(ParseMeta, RequiresFundIdColumn) {
  EXPECT_THROW(meta("name,category\nA,B\n"), ParseError);
}

TEST(Merge, SynthesizesMissingMeta) {
  auto d = parse("fund_id,2000-01\nA,1\nB,2\nC,3\n");
  auto m = meta(std::string(kMetaHeader) + "A,Alpha,,,,,,,,,,,\nB,Beta,,,,,,,,,,,\n");
  const auto merged = merge(d, m);
  EXPECT_EQ(merged.series.size(), 3u);
  EXPECT_EQ(merged.meta.size(), 3u);
  EXPECT_EQ(merged.meta.at("C").name, "C");
  EXPECT_FALSE(merged.meta.at("C").management_fee.has_value());
  EXPECT_EQ(merged.meta.at("A").name, "Alpha");
}

TEST(Merge, EmptyMeta) {
  const auto merged = merge(parse("fund_id,2000-01\nA,1\nB,2\n"), {});
  EXPECT_EQ(merged.meta.size(), 2u);
  EXPECT_EQ(merged.meta.at("B").name, "B");
}

TEST(Merge, DisjointIds) {
  auto m = meta(std::string(kMetaHeader) + "X,Ex,,,,,,,,,,,\n");
  const auto merged = merge(parse("fund_id,2000-01\nA,1\n"), m);
  EXPECT_EQ(merged.series.size(), 1u);
  EXPECT_TRUE(merged.contains("X"));
  EXPECT_EQ(merged.find_series("X"), nullptr);
  EXPECT_NE(merged.find_meta("X"), nullptr);
}

namespace {

// Random returns text plus the number of non-empty cells it contains.
std::pair<std::string, std::size_t> random_returns_text(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> months_d(1, 30), funds_d(1, 12), start_d(0, 200);
  std::uniform_real_distribution<double> val(-25.0, 25.0);
  std::bernoulli_distribution gap(0.2), coarse(0.3);
  const int months = months_d(rng);
  const int start = start_d(rng);
  std::string text = "fund_id";
  for (int m = 0; m < months; ++m) text += "," + format_month(MonthIndex{start + m});
  text += "\n";
  std::size_t cells = 0;
  const int funds = funds_d(rng);
  for (int f = 0; f < funds; ++f) {
    text += "F" + std::to_string(f);
    for (int m = 0; m < months; ++m) {
      text += ",";
      if (gap(rng)) continue;
      std::ostringstream os;
      os.precision(17);
      os << (coarse(rng) ? std::round(val(rng)) : val(rng));
      text += os.str();
      ++cells;
    }
    text += "\n";
  }
  return {text, cells};
}

}  // namespace

TEST(IngestionProperty, RoundTripAndGapPreservation) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const auto [text, cells] = random_returns_text(rng);
    const auto d = parse(text);
    std::size_t values = 0;
    for (const auto& [id, s] : d.series) values += s.returns.size();
    ASSERT_EQ(values, cells) << text;

    std::ostringstream out;
    write_returns(d, out);
    const auto again = parse(out.str());
    ASSERT_EQ(again, d) << text;
  }
}

TEST(Fingerprint, IgnoresFormattingAndTracksValues) {
  const auto a = parse("fund_id,2000-01,2000-02\nF1,1.0,2\n");
  const auto b = parse("fund_id,2000-01,2000-02\nF1,1,2.000\n");
  const auto c = parse("fund_id,2000-01,2000-02\nF1,1,2.5\n");
  EXPECT_EQ(dataset_fingerprint(a), dataset_fingerprint(b));
  EXPECT_NE(dataset_fingerprint(a), dataset_fingerprint(c));
  EXPECT_EQ(dataset_fingerprint(a).size(), 64u);
}

TEST(Fingerprint, DependsOnEpoch) {
  std::istringstream in1("fund_id,2000-01\nF1,1\n"), in2("fund_id,2000-01\nF1,1\n");
  const auto a = parse_returns(in1, Epoch{2000, 1});
  const auto b = parse_returns(in2, Epoch{1999, 1});
  EXPECT_NE(dataset_fingerprint(a), dataset_fingerprint(b));
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_THROW(load_returns_file("/nonexistent/returns.csv"), IoError);
  EXPECT_THROW(load_meta_file("/nonexistent/meta.csv"), IoError);
}

TEST(Files, ParseErrorNamesPath) {
  testing_support::TempDir dir;
  const auto path = dir.file("bad.csv");
  testing_support::write_file(path, "fund_id,2000-01\nF1,oops\n");
  try {
    load_returns_file(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv"), std::string::npos) << e.what();
  }
}

TEST(Files, MetaWriteRoundTrip) {
  auto m = meta(std::string(kMetaHeader) + "F1,\"A, b\",Cat,Dom,1,20,0.5,1.1,1,2,3,4,5\nF2,,,,,,,,,,,,\n");
  std::ostringstream out;
  write_meta(m, out);
  EXPECT_EQ(meta(out.str()), m);
}
