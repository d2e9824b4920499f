#include "gridlight/timeutil.hpp"

#include "gridlight/error.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace gridlight {

namespace {

bool parse_int_field(std::string_view s, std::size_t& pos, int max_digits, int& out) {
    int value = 0;
    int digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])) && digits < max_digits) {
        value = value * 10 + (s[pos] - '0');
        ++pos;
        ++digits;
    }
    if (digits == 0) return false;
    out = value;
    return true;
}

bool expect_char(std::string_view s, std::size_t& pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = static_cast<int>(y + (month <= 2));
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    std::string_view s = trim(text);
    std::size_t pos = 0;
    int year = 0, month = 0, day = 0;
    if (!parse_int_field(s, pos, 4, year)) return std::nullopt;
    if (!expect_char(s, pos, '-')) return std::nullopt;
    if (!parse_int_field(s, pos, 2, month)) return std::nullopt;
    if (!expect_char(s, pos, '-')) return std::nullopt;
    if (!parse_int_field(s, pos, 2, day)) return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;

    int hour = 0, minute = 0, second = 0;
    if (pos < s.size()) {
        if (s[pos] != ' ' && s[pos] != 'T') return std::nullopt;
        ++pos;
        if (!parse_int_field(s, pos, 2, hour)) return std::nullopt;
        if (!expect_char(s, pos, ':')) return std::nullopt;
        if (!parse_int_field(s, pos, 2, minute)) return std::nullopt;
        if (!expect_char(s, pos, ':')) return std::nullopt;
        if (!parse_int_field(s, pos, 2, second)) return std::nullopt;
        if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
        // optional trailing zone marker
        std::string_view rest = trim(s.substr(pos));
        if (!rest.empty() && rest != "Z" && rest != "UTC") return std::nullopt;
        pos = s.size();
    }
    std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return days * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_timestamp(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int year;
    unsigned month, day;
    civil_from_days(days, year, month, day);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld", year, month, day,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::optional<TimeUnits> try_parse_time_units(std::string_view text) {
    std::string_view s = trim(text);
    std::size_t space = s.find_first_of(" \t");
    if (space == std::string_view::npos) return std::nullopt;
    std::string unit = to_lower(trim(s.substr(0, space)));
    std::string_view rest = trim(s.substr(space));
    if (rest.size() < 6 || to_lower(rest.substr(0, 5)) != "since") return std::nullopt;
    rest = trim(rest.substr(5));

    std::int64_t unit_seconds;
    if (unit == "seconds" || unit == "second") unit_seconds = 1;
    else if (unit == "minutes" || unit == "minute") unit_seconds = 60;
    else if (unit == "hours" || unit == "hour") unit_seconds = 3600;
    else if (unit == "days" || unit == "day") unit_seconds = 86400;
    else return std::nullopt;

    auto epoch = parse_timestamp(rest);
    if (!epoch) return std::nullopt;
    return TimeUnits{unit_seconds, *epoch, std::string(trim(text))};
}

TimeUnits parse_time_units(std::string_view text) {
    auto u = try_parse_time_units(text);
    if (!u) fail(Errc::UnparsableUnits, "cannot parse time units '" + std::string(text) + "'");
    return *u;
}

double decode_time(double raw, const TimeUnits& units) {
    return static_cast<double>(units.epoch_seconds) + raw * static_cast<double>(units.unit_seconds);
}

double encode_time(double epoch_seconds, const TimeUnits& units) {
    return (epoch_seconds - static_cast<double>(units.epoch_seconds)) / static_cast<double>(units.unit_seconds);
}

} // namespace gridlight
