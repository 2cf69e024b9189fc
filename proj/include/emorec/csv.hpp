#pragma once

#include <string>
#include <vector>

namespace emorec {

// Minimal RFC-4180-style CSV helpers: quoting only when needed, LF endings.

std::string csv_escape(const std::string& field);

// Splits one line on `delim`, honoring double-quoted fields.
std::vector<std::string> csv_split(const std::string& line, char delim = ',');

// Shortest round-trip decimal form of a double (via std::to_chars).
std::string format_double(double value);

// Fixed-precision form, e.g. format_fixed(1.5, 3) == "1.500".
std::string format_fixed(double value, int precision);

}  // namespace emorec
