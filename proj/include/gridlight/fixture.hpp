#pragma once

#include "gridlight/gridfile.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gridlight {

/// Fill presets are deterministic functions of the coordinate values, so
/// every generated value can be recomputed analytically:
///   coord-sum    sum of the coordinate values
///   constant     the preset argument
///   sinusoidal   sin(sum of the coordinate values)
struct FixtureVar {
    std::string name;
    std::string preset = "coord-sum";
    double arg = 0.0;
};

/// Multi-file fixture with an hourly-advancing time axis. Axis conventions:
///   time  hour index, advancing across files (units attribute attached)
///   lat   90 down to -90, descending
///   lon   0 up to 360*(n-1)/n, ascending
///   other 0..n-1
struct FixtureSpec {
    std::string out_dir;
    std::vector<std::pair<std::string, std::int64_t>> dims;
    int files = 1;
    std::vector<FixtureVar> vars;
    std::string prefix = "fx";
    std::string time_units = "hours since 2017-01-01 00:00:00";
};

std::vector<std::string> generate_fixture(const FixtureSpec& spec);

FillFn fixture_fill(const FixtureVar& var);

std::vector<double> fixture_axis_values(const std::string& dim, std::int64_t length,
                                        std::int64_t file_index, std::int64_t time_len);

} // namespace gridlight
