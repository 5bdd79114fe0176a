#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asmb::text {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_ws(std::string_view s);
// Splits on '\n', stripping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view s);

} // namespace asmb::text
