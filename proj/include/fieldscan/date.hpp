#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fieldscan {

/// Calendar date (proleptic Gregorian). Stored as plain y/m/d; arithmetic
/// goes through the civil-days ordinal so date differences are exact day counts.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    /// Days since 1970-01-01 (negative before).
    [[nodiscard]] std::int64_t ordinal() const {
        std::int64_t y = year;
        const int m = month;
        y -= m <= 2;
        const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153u * (m > 2 ? m - 3 : m + 9) + 2u) / 5u + day - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
    }

    static Date from_ordinal(std::int64_t z) {
        z += 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp < 10 ? mp + 3 : mp - 9;
        return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
    }

    [[nodiscard]] Date plus_days(std::int64_t n) const { return from_ordinal(ordinal() + n); }

    [[nodiscard]] std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
        return buf;
    }

    /// Parses "YYYY-MM-DD". Throws on malformed input.
    static Date parse(const std::string& iso) {
        int y = 0, m = 0, d = 0;
        char extra = 0;
        if (std::sscanf(iso.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3 ||
            m < 1 || m > 12 || d < 1 || d > 31) {
            throw std::invalid_argument("not an ISO date: '" + iso + "'");
        }
        return Date{y, m, d};
    }
};

inline std::int64_t days_between(const Date& from, const Date& to) {
    return to.ordinal() - from.ordinal();
}

}  // namespace fieldscan
