#include "sigcompose/ingestion.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "sigcompose/error.hpp"

namespace sigcompose {

namespace {

using detail::parse_number;
using detail::split_csv;
using detail::trim;

std::string checked_fund_id(std::string_view raw, std::size_t line_no) {
  const auto id = trim(raw);
  if (id.empty()) throw ParseError(line_no, "empty fund_id");
  for (unsigned char c : id) {
    if (std::iscntrl(c)) throw ParseError(line_no, "control character in fund_id");
  }
  return std::string(id);
}

bool blank(const std::string& line) { return trim(line).empty(); }

std::optional<double> numeric_cell(const std::string& cell, const std::string& column,
                                   const std::string& fund_id, std::size_t line_no) {
  if (trim(cell).empty()) return std::nullopt;
  auto value = parse_number(cell);
  if (!value) {
    throw ParseError(line_no, "non-numeric " + column + " '" + cell + "' for fund " + fund_id);
  }
  return value;
}

void write_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << detail::format_number(*v);
}

}  // namespace

const FundMeta* Dataset::find_meta(const std::string& fund_id) const {
  auto it = meta.find(fund_id);
  return it == meta.end() ? nullptr : &it->second;
}

const ReturnSeries* Dataset::find_series(const std::string& fund_id) const {
  auto it = series.find(fund_id);
  return it == series.end() ? nullptr : &it->second;
}

Dataset parse_returns(std::istream& input, Epoch epoch) {
  std::string line;
  std::size_t line_no = 0;
  while (detail::read_line(input, line)) {
    ++line_no;
    if (!blank(line)) break;
    line.clear();
  }
  if (blank(line)) throw ParseError(line_no ? line_no : 1, "missing header line");

  const auto header = split_csv(line, line_no);
  if (trim(header[0]) != "fund_id") {
    throw ParseError(line_no, "header must start with 'fund_id'");
  }
  if (header.size() < 2) throw ParseError(line_no, "header declares no months");

  Dataset dataset;
  dataset.epoch = epoch;
  std::vector<MonthIndex> months;
  for (std::size_t i = 1; i < header.size(); ++i) {
    MonthIndex m;
    try {
      m = parse_month(trim(header[i]), epoch);
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, e.what());
    }
    if (!months.empty() && m.value != months.back().value + 1) {
      throw ParseError(line_no, "header months must be consecutive (" +
                                    format_month(months.back(), epoch) + " then " +
                                    std::string(trim(header[i])) + ")");
    }
    months.push_back(m);
  }
  dataset.month_range = {months.front(), months.back()};

  while (detail::read_line(input, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto cells = split_csv(line, line_no);
    const auto fund_id = checked_fund_id(cells[0], line_no);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(months.size()) + " returns, got " +
                                    std::to_string(cells.size() - 1));
    }
    if (dataset.series.count(fund_id)) throw ParseError(line_no, "duplicate fund " + fund_id);

    ReturnSeries series{fund_id, {}};
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (trim(cells[i]).empty()) continue;
      auto value = parse_number(cells[i]);
      if (!value) {
        throw ParseError(line_no, "non-numeric return '" + cells[i] + "' for fund " + fund_id +
                                      " at " + format_month(months[i - 1], epoch));
      }
      series.returns.emplace(months[i - 1], *value);
    }
    dataset.series.emplace(fund_id, std::move(series));
  }
  return dataset;
}

std::map<std::string, FundMeta> parse_meta(std::istream& input) {
  std::map<std::string, FundMeta> out;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> columns;
  while (detail::read_line(input, line)) {
    ++line_no;
    if (!blank(line)) break;
  }
  if (blank(line)) return out;

  for (auto& c : split_csv(line, line_no)) columns.emplace_back(trim(c));
  const auto id_col = std::find(columns.begin(), columns.end(), "fund_id");
  if (id_col == columns.end()) throw ParseError(line_no, "metadata header lacks 'fund_id'");
  {
    std::set<std::string> seen;
    for (const auto& c : columns) {
      if (!seen.insert(c).second) throw ParseError(line_no, "duplicate column '" + c + "'");
    }
  }
  const auto id_index = static_cast<std::size_t>(id_col - columns.begin());

  while (detail::read_line(input, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto cells = split_csv(line, line_no);
    if (cells.size() != columns.size()) {
      throw ParseError(line_no, "expected " + std::to_string(columns.size()) + " columns, got " +
                                    std::to_string(cells.size()));
    }
    FundMeta meta;
    meta.fund_id = checked_fund_id(cells[id_index], line_no);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const auto& col = columns[i];
      const auto& cell = cells[i];
      if (col == "fund_id") continue;
      if (col == "name") meta.name = trim(cell);
      else if (col == "category") meta.category = trim(cell);
      else if (col == "domicile") meta.domicile = trim(cell);
      else if (col == "management_fee") meta.management_fee = numeric_cell(cell, col, meta.fund_id, line_no);
      else if (col == "performance_fee") meta.performance_fee = numeric_cell(cell, col, meta.fund_id, line_no);
      else if (col == "redemption_fee") meta.redemption_fee = numeric_cell(cell, col, meta.fund_id, line_no);
      else if (col == "sharpe_ratio") meta.sharpe_ratio = numeric_cell(cell, col, meta.fund_id, line_no);
      else if (col == "ret_1m") meta.trailing_returns.m1 = numeric_cell(cell, col, meta.fund_id, line_no);
      else if (col == "ret_3m") meta.trailing_returns.m3 = numeric_cell(cell, col, meta.fund_id, line_no);
      else if (col == "ret_6m") meta.trailing_returns.m6 = numeric_cell(cell, col, meta.fund_id, line_no);
      else if (col == "ret_1y") meta.trailing_returns.y1 = numeric_cell(cell, col, meta.fund_id, line_no);
      else if (col == "ret_3y") meta.trailing_returns.y3 = numeric_cell(cell, col, meta.fund_id, line_no);
      else meta.extra_fields.emplace_back(col, cell);
    }
    if (meta.name.empty()) meta.name = meta.fund_id;
    const auto id = meta.fund_id;
    if (!out.emplace(id, std::move(meta)).second) {
      throw ParseError(line_no, "duplicate fund " + id);
    }
  }
  return out;
}

Dataset merge(Dataset series_dataset, std::map<std::string, FundMeta> meta) {
  for (const auto& [id, series] : series_dataset.series) {
    if (!meta.count(id)) {
      FundMeta minimal;
      minimal.fund_id = id;
      minimal.name = id;
      meta.emplace(id, std::move(minimal));
    }
  }
  series_dataset.meta = std::move(meta);
  return series_dataset;
}

void write_returns(const Dataset& dataset, std::ostream& out) {
  const auto& range = dataset.month_range;
  out << "fund_id";
  for (int m = range.first.value; m <= range.last.value; ++m) {
    out << ',' << format_month(MonthIndex{m}, dataset.epoch);
  }
  out << '\n';
  for (const auto& [id, series] : dataset.series) {
    out << detail::quote_csv(id);
    for (int m = range.first.value; m <= range.last.value; ++m) {
      out << ',';
      auto it = series.returns.find(MonthIndex{m});
      if (it != series.returns.end()) out << detail::format_number(it->second);
    }
    out << '\n';
  }
}

void write_meta(const std::map<std::string, FundMeta>& meta, std::ostream& out) {
  // Extra columns are the union over all funds, in first-seen order.
  std::vector<std::string> extra;
  for (const auto& [id, m] : meta) {
    for (const auto& [key, value] : m.extra_fields) {
      if (std::find(extra.begin(), extra.end(), key) == extra.end()) extra.push_back(key);
    }
  }
  out << "fund_id,name,category,domicile,management_fee,performance_fee,redemption_fee,"
         "sharpe_ratio,ret_1m,ret_3m,ret_6m,ret_1y,ret_3y";
  for (const auto& key : extra) out << ',' << detail::quote_csv(key);
  out << '\n';
  for (const auto& [id, m] : meta) {
    out << detail::quote_csv(id) << ',' << detail::quote_csv(m.name) << ','
        << detail::quote_csv(m.category) << ',' << detail::quote_csv(m.domicile) << ',';
    write_optional(out, m.management_fee);
    out << ',';
    write_optional(out, m.performance_fee);
    out << ',';
    write_optional(out, m.redemption_fee);
    out << ',';
    write_optional(out, m.sharpe_ratio);
    for (const auto* v : {&m.trailing_returns.m1, &m.trailing_returns.m3, &m.trailing_returns.m6,
                          &m.trailing_returns.y1, &m.trailing_returns.y3}) {
      out << ',';
      write_optional(out, *v);
    }
    for (const auto& key : extra) {
      out << ',';
      for (const auto& [k, value] : m.extra_fields) {
        if (k == key) {
          out << detail::quote_csv(value);
          break;
        }
      }
    }
    out << '\n';
  }
}

std::string dataset_fingerprint(const Dataset& dataset) {
  std::ostringstream canonical;
  canonical << "epoch=" << format_epoch(dataset.epoch) << '\n';
  write_returns(dataset, canonical);
  const std::string text = canonical.str();

  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int size = 0;
  if (EVP_Digest(text.data(), text.size(), digest.data(), &size, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(size * 2);
  for (unsigned int i = 0; i < size; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

Dataset load_returns_file(const std::string& path, Epoch epoch) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open returns file " + path);
  try {
    return parse_returns(in, epoch);
  } catch (const ParseError& e) {
    throw ParseError(path, e);
  }
}

std::map<std::string, FundMeta> load_meta_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metadata file " + path);
  try {
    return parse_meta(in);
  } catch (const ParseError& e) {
    throw ParseError(path, e);
  }
}

}  // namespace sigcompose
