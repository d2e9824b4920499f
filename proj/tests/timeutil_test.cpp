#include "gridlight/timeutil.hpp"

#include "gridlight/error.hpp"

#include <doctest.h>

#include <random>

using namespace gridlight;

TEST_CASE("timestamp parse and format round-trip") {
    auto t = parse_timestamp("2017-01-01 04:00:00");
    REQUIRE(t.has_value());
    CHECK(format_timestamp(*t) == "2017-01-01 04:00:00");

    CHECK(parse_timestamp("2017-01-01T04:00:00") == t);
    CHECK(parse_timestamp("2017-01-01") == parse_timestamp("2017-01-01 00:00:00"));
    CHECK(parse_timestamp("1970-01-01 00:00:00") == 0);
    CHECK(parse_timestamp("1969-12-31 23:59:59") == -1);
    CHECK_FALSE(parse_timestamp("not a date").has_value());
    CHECK_FALSE(parse_timestamp("2017-13-01 00:00:00").has_value());

    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        std::int64_t v = static_cast<std::int64_t>(rng() % 4102444800ull) - 86400 * 365;
        CHECK(parse_timestamp(format_timestamp(v)) == v);
    }
}

TEST_CASE("civil conversions invert each other") {
    CHECK(days_from_civil(1970, 1, 1) == 0);
    CHECK(days_from_civil(2000, 3, 1) == 11017);
    int y;
    unsigned m, d;
    civil_from_days(11017, y, m, d);
    CHECK(y == 2000);
    CHECK(m == 3);
    CHECK(d == 1);
}

TEST_CASE("decode_time matches the documented example") {
    TimeUnits units = parse_time_units("hours since 2017-01-01 00:00:00");
    CHECK(units.unit_seconds == 3600);
    double decoded = decode_time(4.0, units);
    CHECK(format_timestamp(static_cast<std::int64_t>(decoded)) == "2017-01-01 04:00:00");

    // raw = 0 decodes to the epoch itself
    CHECK(decode_time(0.0, units) == static_cast<double>(units.epoch_seconds));

    // exact inverse for integral raw values
    for (double raw : {0.0, 1.0, 24.0, 8760.0, -5.0})
        CHECK(encode_time(decode_time(raw, units), units) == raw);
}

TEST_CASE("unit variants parse and junk does not") {
    CHECK(parse_time_units("seconds since 1970-01-01").unit_seconds == 1);
    CHECK(parse_time_units("minutes since 1970-01-01").unit_seconds == 60);
    CHECK(parse_time_units("days since 1970-01-01").unit_seconds == 86400);
    CHECK(parse_time_units("hour since 1970-01-01").unit_seconds == 3600);

    CHECK_FALSE(try_parse_time_units("fortnights since 2000-01-01").has_value());
    CHECK_FALSE(try_parse_time_units("degrees_north").has_value());
    try {
        parse_time_units("fortnights since 2000-01-01");
        FAIL("expected UnparsableUnits");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnparsableUnits);
    }
}
