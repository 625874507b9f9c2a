#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace crowdimpute {

/// Shortest decimal text that round-trips to `value` ("78.5", "67", "1.708").
std::string format_number(double value);

/// Fixed one-decimal rendering used in survey text and report tables.
std::string format_1dp(double value);

/// Round to `decimals` places (half away from zero).
double round_to(double value, int decimals);

/// Parse a full string as a finite double; surrounding blanks are allowed.
bool parse_number(std::string_view text, double& out);

std::string_view trim(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// "a", "a and b", "a, b and c".
std::string join_phrase(const std::vector<std::string>& parts);

}  // namespace crowdimpute
