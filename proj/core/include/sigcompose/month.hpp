#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace sigcompose {

// Calendar month that MonthIndex values count from.
struct Epoch {
  int year = 2000;
  int month = 1;  // 1..12

  friend bool operator==(const Epoch&, const Epoch&) = default;
};

// Months elapsed since an Epoch. Ordering is calendar ordering.
struct MonthIndex {
  int value = 0;

  friend auto operator<=>(const MonthIndex&, const MonthIndex&) = default;
  MonthIndex operator+(int months) const { return MonthIndex{value + months}; }
  int operator-(MonthIndex other) const { return value - other.value; }
};

// Parses "YYYY-MM". Throws InvalidArgument on malformed text or a month
// before the epoch.
MonthIndex parse_month(std::string_view text, Epoch epoch = {});

// Formats as "YYYY-MM".
std::string format_month(MonthIndex month, Epoch epoch = {});

std::string format_epoch(Epoch epoch);

}  // namespace sigcompose
