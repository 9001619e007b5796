#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ticknet {

/// Calendar date. No timezone handling anywhere in the pipeline: all
/// timestamps are exchange-local wall clock.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    /// Days since 1970-01-01 (proleptic Gregorian).
    [[nodiscard]] int64_t serial() const;
    static Date from_serial(int64_t days);

    static Date parse(std::string_view iso);  // "YYYY-MM-DD"
    [[nodiscard]] std::string to_string() const;

    auto operator<=>(const Date&) const = default;
};

/// Wall-clock time of day, second resolution.
struct TimeOfDay {
    int seconds = 0;  // since midnight, [0, 86400)

    static TimeOfDay parse(std::string_view hms);  // "HH:MM" or "HH:MM:SS"
    [[nodiscard]] std::string to_string() const;

    auto operator<=>(const TimeOfDay&) const = default;
};

/// Instant = date + second-of-day.
struct Timestamp {
    Date date;
    int seconds = 0;

    static Timestamp parse(std::string_view iso);  // "YYYY-MM-DDTHH:MM:SS"
    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] int64_t epoch_seconds() const { return date.serial() * 86400 + seconds; }

    auto operator<=>(const Timestamp&) const = default;
};

}  // namespace ticknet
