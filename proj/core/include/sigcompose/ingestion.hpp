#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sigcompose/month.hpp"

namespace sigcompose {

// One fund's monthly returns in percent (1.89 means +1.89%). Months may be
// missing; at most one value per month.
struct ReturnSeries {
  std::string fund_id;
  std::map<MonthIndex, double> returns;

  friend bool operator==(const ReturnSeries&, const ReturnSeries&) = default;
};

struct TrailingReturns {
  std::optional<double> m1;
  std::optional<double> m3;
  std::optional<double> m6;
  std::optional<double> y1;
  std::optional<double> y3;

  friend bool operator==(const TrailingReturns&, const TrailingReturns&) = default;
};

// Display and comparison details for a fund. Numeric fields are absent when
// the source cell was empty; absence never means zero.
struct FundMeta {
  std::string fund_id;
  std::string name;
  std::string category;
  std::string domicile;
  std::optional<double> management_fee;
  std::optional<double> performance_fee;
  std::optional<double> redemption_fee;
  std::optional<double> sharpe_ratio;
  TrailingReturns trailing_returns;
  std::vector<std::pair<std::string, std::string>> extra_fields;

  friend bool operator==(const FundMeta&, const FundMeta&) = default;
};

struct MonthRange {
  MonthIndex first;
  MonthIndex last;  // inclusive

  int length() const { return last.value - first.value + 1; }
  bool contains(MonthIndex m) const { return first <= m && m <= last; }
  friend bool operator==(const MonthRange&, const MonthRange&) = default;
};

// The in-memory dataset. Immutable once merged; safe to share across threads.
// Funds in `series` are classifiable; funds only in `meta` are display-only.
struct Dataset {
  Epoch epoch;
  MonthRange month_range;
  std::map<std::string, ReturnSeries> series;
  std::map<std::string, FundMeta> meta;

  const FundMeta* find_meta(const std::string& fund_id) const;
  const ReturnSeries* find_series(const std::string& fund_id) const;
  bool contains(const std::string& fund_id) const {
    return series.count(fund_id) || meta.count(fund_id);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Returns file: header `fund_id,YYYY-MM,...` of consecutive months, then one
// row per fund with one cell per month; an empty cell is a gap.
Dataset parse_returns(std::istream& input, Epoch epoch = {});

// Metadata file with named columns; unknown columns land in extra_fields.
std::map<std::string, FundMeta> parse_meta(std::istream& input);

// Funds with series but no metadata get a minimal record named after the id.
Dataset merge(Dataset series_dataset, std::map<std::string, FundMeta> meta);

// Canonical returns-file text; parse_returns(write_returns(d)) == d for the
// series part of d.
void write_returns(const Dataset& dataset, std::ostream& out);
void write_meta(const std::map<std::string, FundMeta>& meta, std::ostream& out);

// Hex SHA-256 over the epoch and the canonical returns file.
std::string dataset_fingerprint(const Dataset& dataset);

// File helpers; throw ParseError / Error with the path in the message.
Dataset load_returns_file(const std::string& path, Epoch epoch = {});
std::map<std::string, FundMeta> load_meta_file(const std::string& path);

}  // namespace sigcompose
