#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace crossgp {

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
// Timestamps are treated in the device's own local clock; no timezone math.
struct Date {
    std::int32_t serial = 0;

    static Date fromYmd(int year, int month, int day);
    void toYmd(int& year, int& month, int& day) const;

    Date next() const { return Date{serial + 1}; }
    std::string str() const;  // YYYY-MM-DD

    auto operator<=>(const Date&) const = default;
};

// Minute-resolution timestamp.
struct DateTime {
    Date date;
    std::int32_t minute = 0;  // minute of day, [0, 1440)

    std::string str() const;  // YYYY-MM-DDTHH:MM

    auto operator<=>(const DateTime&) const = default;
};

std::optional<Date> parseDate(std::string_view s);
std::optional<DateTime> parseDateTime(std::string_view s);

}  // namespace crossgp
