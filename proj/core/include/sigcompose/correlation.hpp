#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sigcompose/ingestion.hpp"

namespace sigcompose {

// Pearson r between two funds over the months both report inside a range.
// r is absent with fewer than 3 common months or zero variance on a side.
struct CorrelationResult {
  std::string fund_a;
  std::string fund_b;
  std::optional<double> r;
  int months_used = 0;
};

inline constexpr int kMinCorrelationMonths = 3;

// Product-moment coefficient of two equal-length samples, clamped to [-1, 1].
std::optional<double> pearson_r(std::span<const double> a, std::span<const double> b);

CorrelationResult pearson(const ReturnSeries& a, const ReturnSeries& b, MonthRange range);

// Symmetric matrix over the given funds; unit diagonal where a fund has
// variance in the range.
class CorrelationMatrix {
 public:
  CorrelationMatrix(std::vector<std::string> fund_ids);

  const std::vector<std::string>& fund_ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  const std::optional<double>& at(std::size_t i, std::size_t j) const { return values_[i * ids_.size() + j]; }
  void set(std::size_t i, std::size_t j, std::optional<double> r);

 private:
  std::vector<std::string> ids_;
  std::vector<std::optional<double>> values_;
};

// Throws InvalidArgument with fewer than 2 funds; NotFound for an id without a series.
CorrelationMatrix correlation_matrix(const std::vector<std::string>& fund_ids, const Dataset& dataset,
                                     MonthRange range);

}  // namespace sigcompose
