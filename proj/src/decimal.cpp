#include "ticknet/decimal.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ticknet {

Decimal Decimal::parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty decimal");
    size_t pos = 0;
    bool negative = false;
    if (text[0] == '-' || text[0] == '+') {
        negative = text[0] == '-';
        pos = 1;
    }
    int64_t whole = 0, frac = 0;
    int frac_digits = 0;
    bool any_digit = false, in_frac = false;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (c == '.') {
            if (in_frac) throw std::invalid_argument("bad decimal: '" + std::string(text) + "'");
            in_frac = true;
            continue;
        }
        if (c < '0' || c > '9')
            throw std::invalid_argument("bad decimal: '" + std::string(text) + "'");
        any_digit = true;
        if (!in_frac) {
            if (whole > (INT64_MAX / kScale - 9) / 10)
                throw std::invalid_argument("decimal overflow: '" + std::string(text) + "'");
            whole = whole * 10 + (c - '0');
        } else {
            if (frac_digits >= 9)
                throw std::invalid_argument("decimal has more than 9 fractional digits: '" +
                                            std::string(text) + "'");
            frac = frac * 10 + (c - '0');
            ++frac_digits;
        }
    }
    if (!any_digit) throw std::invalid_argument("bad decimal: '" + std::string(text) + "'");
    for (; frac_digits < 9; ++frac_digits) frac *= 10;
    int64_t units = whole * kScale + frac;
    return Decimal{negative ? -units : units};
}

std::string Decimal::to_string() const {
    int64_t u = units;
    std::string sign;
    if (u < 0) {
        sign = "-";
        u = -u;
    }
    int64_t whole = u / kScale, frac = u % kScale;
    char buf[32];
    if (frac == 0) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(whole));
        return sign + buf;
    }
    std::snprintf(buf, sizeof buf, "%lld.%09lld", static_cast<long long>(whole),
                  static_cast<long long>(frac));
    std::string s = sign + buf;
    while (s.back() == '0') s.pop_back();
    return s;
}

Decimal Decimal::from_double(double v) {
    return Decimal{static_cast<int64_t>(std::llround(v * kScale))};
}

}  // namespace ticknet
