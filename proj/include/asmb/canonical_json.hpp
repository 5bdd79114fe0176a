#pragma once

#include <cstdint>

#include <string>

#include <json.hpp>

namespace asmb {

using json = nlohmann::json;

// Sorted keys, no whitespace, floating-point numbers as shortest round-trip
// decimals. Integral doubles print without a fraction and reload as integers.
std::string canonical_dump(const json& j);

// Integer of either signedness with a value >= 0.
inline bool is_nonnegative_integer(const json& j) {
    return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

} // namespace asmb
