#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coldpref::csv {

// Splits one CSV record. Handles double-quoted fields with "" escapes;
// embedded newlines are not supported.
std::vector<std::string> split_line(std::string_view line);

// Reads the next non-empty line (CR stripped). Returns false at EOF.
bool next_line(std::istream& in, std::string& line);

std::string_view trim(std::string_view text);

// Whole-string numeric parse, surrounding whitespace allowed.
std::optional<double> parse_double(std::string_view text);

// Shortest "%.17g"-style text that parses back to the same double.
std::string format_double(double value);

// Fixed-precision text, locale independent.
std::string format_fixed(double value, int decimals);

}  // namespace coldpref::csv
