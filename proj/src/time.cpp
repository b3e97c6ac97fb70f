#include "crossgp/time.hpp"

#include <charconv>
#include <cstdio>

namespace crossgp {

namespace {

// Howard Hinnant's civil calendar algorithms.
std::int32_t daysFromCivil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int32_t>(era * 146097 + static_cast<int>(doe) - 719468);
}

void civilFromDays(std::int32_t z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = yr + (m <= 2);
}

bool parseIntField(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

bool daysInMonthOk(int y, int m, int d) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m < 1 || m > 12 || d < 1) return false;
    int len = lengths[m - 1];
    if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) len = 29;
    return d <= len;
}

}  // namespace

Date Date::fromYmd(int year, int month, int day) {
    return Date{daysFromCivil(year, month, day)};
}

void Date::toYmd(int& year, int& month, int& day) const {
    civilFromDays(serial, year, month, day);
}

std::string Date::str() const {
    int y, m, d;
    toYmd(y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::string DateTime::str() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "T%02d:%02d", minute / 60, minute % 60);
    return date.str() + buf;
}

std::optional<Date> parseDate(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y, m, d;
    if (!parseIntField(s.substr(0, 4), y) || !parseIntField(s.substr(5, 2), m) ||
        !parseIntField(s.substr(8, 2), d))
        return std::nullopt;
    if (!daysInMonthOk(y, m, d)) return std::nullopt;
    return Date::fromYmd(y, m, d);
}

std::optional<DateTime> parseDateTime(std::string_view s) {
    if (s.size() != 16 || s[10] != 'T' || s[13] != ':') return std::nullopt;
    auto date = parseDate(s.substr(0, 10));
    if (!date) return std::nullopt;
    int hh, mm;
    if (!parseIntField(s.substr(11, 2), hh) || !parseIntField(s.substr(14, 2), mm))
        return std::nullopt;
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59) return std::nullopt;
    return DateTime{*date, hh * 60 + mm};
}

}  // namespace crossgp
