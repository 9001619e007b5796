#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ticknet {

/// Fixed-point decimal for prices: integer count of 1e-9 currency units.
/// Tick prices stay in this exact form through VWAP aggregation so that
/// bar values are independent of summation order; conversion to binary
/// floating point happens once, when log returns are taken.
struct Decimal {
    static constexpr int64_t kScale = 1'000'000'000;  // 9 fractional digits

    int64_t units = 0;

    static Decimal parse(std::string_view text);  // throws std::invalid_argument
    [[nodiscard]] std::string to_string() const;  // trailing zeros trimmed
    [[nodiscard]] double to_double() const { return static_cast<double>(units) / kScale; }

    static Decimal from_double(double v);  // rounds to nearest unit

    auto operator<=>(const Decimal&) const = default;
};

}  // namespace ticknet
