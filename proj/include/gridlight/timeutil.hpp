#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gridlight {

/// Parsed epoch rule from a NetCDF-style units attribute such as
/// "hours since 2017-01-01 00:00:00". Timestamps are represented as
/// seconds since the Unix epoch (UTC) throughout the engine.
struct TimeUnits {
    std::int64_t unit_seconds = 3600;
    std::int64_t epoch_seconds = 0;
    std::string text;

    bool operator==(const TimeUnits&) const = default;
};

/// Parses "<unit> since <instant>", unit in {seconds, minutes, hours, days}
/// (singular forms accepted). Throws Errc::UnparsableUnits.
TimeUnits parse_time_units(std::string_view text);

/// Non-throwing variant; nullopt when the text is not a time-units rule.
std::optional<TimeUnits> try_parse_time_units(std::string_view text);

/// 'YYYY-MM-DD HH:MM:SS' (a 'T' separator and a date-only form are accepted;
/// interpreted as UTC). Returns seconds since the Unix epoch.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

std::string format_timestamp(std::int64_t epoch_seconds);

/// timestamp = epoch + raw * unit length. Exact for integral raw.
double decode_time(double raw, const TimeUnits& units);

/// Inverse of decode_time.
double encode_time(double epoch_seconds, const TimeUnits& units);

/// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

} // namespace gridlight
