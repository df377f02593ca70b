#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zinbgt {

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double v);

/// Parses the output of format_double (and ordinary decimal text).
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char delimiter);

}  // namespace zinbgt
