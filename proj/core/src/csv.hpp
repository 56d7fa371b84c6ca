#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sigcompose::detail {

// Splits one CSV record. Double-quoted fields may contain commas and
// doubled quotes. Throws ParseError tagged with line_no on an unterminated
// quote.
std::vector<std::string> split_csv(std::string_view line, std::size_t line_no);

// Quotes a field only when it contains a comma, quote or leading/trailing space.
std::string quote_csv(std::string_view field);

// Reads one line, stripping a trailing '\r'. Returns false at end of input.
bool read_line(std::istream& in, std::string& line);

// Strict decimal parse of the whole field (surrounding blanks allowed).
// Rejects inf/nan.
std::optional<double> parse_number(std::string_view text);

// Shortest text that parses back to exactly the same double.
std::string format_number(double value);

std::string_view trim(std::string_view text);

}  // namespace sigcompose::detail
