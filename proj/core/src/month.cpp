#include "sigcompose/month.hpp"

#include <charconv>
#include <cstdio>

#include "sigcompose/error.hpp"

namespace sigcompose {

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

MonthIndex parse_month(std::string_view text, Epoch epoch) {
  int year = 0;
  int month = 0;
  if (text.size() != 7 || text[4] != '-' || !parse_int(text.substr(0, 4), year) ||
      !parse_int(text.substr(5, 2), month) || month < 1 || month > 12) {
    throw InvalidArgument("malformed month '" + std::string(text) + "', expected YYYY-MM");
  }
  const int value = (year - epoch.year) * 12 + (month - epoch.month);
  if (value < 0) {
    throw InvalidArgument("month " + std::string(text) + " precedes epoch " + format_epoch(epoch));
  }
  return MonthIndex{value};
}

std::string format_month(MonthIndex month, Epoch epoch) {
  const int absolute = epoch.year * 12 + (epoch.month - 1) + month.value;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", absolute / 12, absolute % 12 + 1);
  return buf;
}

std::string format_epoch(Epoch epoch) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", epoch.year, epoch.month);
  return buf;
}

}  // namespace sigcompose
