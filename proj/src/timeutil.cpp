#include "ticknet/timeutil.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace ticknet {

namespace {

int parse_int_field(std::string_view s, const char* what) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::invalid_argument(std::string("bad ") + what + ": '" + std::string(s) + "'");
    return v;
}

constexpr int days_in_month(int y, int m) {
    constexpr int lens[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) return 29;
    return lens[m - 1];
}

}  // namespace

// Howard Hinnant's civil-days algorithm.
int64_t Date::serial() const {
    int y = year - (month <= 2);
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

Date Date::from_serial(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw std::invalid_argument("bad date: '" + std::string(iso) + "'");
    Date d{parse_int_field(iso.substr(0, 4), "year"),
           parse_int_field(iso.substr(5, 2), "month"),
           parse_int_field(iso.substr(8, 2), "day")};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw std::invalid_argument("bad date: '" + std::string(iso) + "'");
    return d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

TimeOfDay TimeOfDay::parse(std::string_view hms) {
    if (hms.size() != 5 && hms.size() != 8)
        throw std::invalid_argument("bad time: '" + std::string(hms) + "'");
    if (hms[2] != ':' || (hms.size() == 8 && hms[5] != ':'))
        throw std::invalid_argument("bad time: '" + std::string(hms) + "'");
    int h = parse_int_field(hms.substr(0, 2), "hour");
    int m = parse_int_field(hms.substr(3, 2), "minute");
    int s = hms.size() == 8 ? parse_int_field(hms.substr(6, 2), "second") : 0;
    if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59)
        throw std::invalid_argument("bad time: '" + std::string(hms) + "'");
    return TimeOfDay{h * 3600 + m * 60 + s};
}

std::string TimeOfDay::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", (seconds / 3600) % 100, (seconds / 60) % 60,
                  seconds % 60);
    return buf;
}

Timestamp Timestamp::parse(std::string_view iso) {
    if (iso.size() != 19 || iso[10] != 'T')
        throw std::invalid_argument("bad timestamp: '" + std::string(iso) + "'");
    return Timestamp{Date::parse(iso.substr(0, 10)), TimeOfDay::parse(iso.substr(11)).seconds};
}

std::string Timestamp::to_string() const {
    return date.to_string() + "T" + TimeOfDay{seconds}.to_string();
}

}  // namespace ticknet
