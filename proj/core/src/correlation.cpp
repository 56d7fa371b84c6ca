#include "sigcompose/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "sigcompose/error.hpp"

namespace sigcompose {

std::optional<double> pearson_r(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson_r needs equal-length samples");
  const std::size_t n = a.size();
  if (n < static_cast<std::size_t>(kMinCorrelationMonths)) return std::nullopt;

  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);

  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a <= 0.0 || var_b <= 0.0) return std::nullopt;
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

CorrelationResult pearson(const ReturnSeries& a, const ReturnSeries& b, MonthRange range) {
  std::vector<double> xs;
  std::vector<double> ys;
  auto ia = a.returns.lower_bound(range.first);
  auto ib = b.returns.lower_bound(range.first);
  while (ia != a.returns.end() && ib != b.returns.end() && ia->first <= range.last &&
         ib->first <= range.last) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      xs.push_back(ia->second);
      ys.push_back(ib->second);
      ++ia;
      ++ib;
    }
  }
  return {a.fund_id, b.fund_id, pearson_r(xs, ys), static_cast<int>(xs.size())};
}

CorrelationMatrix::CorrelationMatrix(std::vector<std::string> fund_ids)
    : ids_(std::move(fund_ids)), values_(ids_.size() * ids_.size()) {}

void CorrelationMatrix::set(std::size_t i, std::size_t j, std::optional<double> r) {
  values_[i * ids_.size() + j] = r;
  values_[j * ids_.size() + i] = r;
}

CorrelationMatrix correlation_matrix(const std::vector<std::string>& fund_ids, const Dataset& dataset,
                                     MonthRange range) {
  if (fund_ids.size() < 2) throw InvalidArgument("correlation matrix needs at least 2 funds");
  std::vector<const ReturnSeries*> series;
  for (const auto& id : fund_ids) {
    const auto* s = dataset.find_series(id);
    if (!s) throw NotFound("no return series for fund " + id);
    series.push_back(s);
  }
  CorrelationMatrix matrix(fund_ids);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto self = pearson(*series[i], *series[i], range);
    matrix.set(i, i, self.r ? std::optional<double>(1.0) : std::nullopt);
    for (std::size_t j = i + 1; j < series.size(); ++j) {
      matrix.set(i, j, pearson(*series[i], *series[j], range).r);
    }
  }
  return matrix;
}

}  // namespace sigcompose
