#include "gridlight/fixture.hpp"

#include "gridlight/error.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

namespace gridlight {

std::vector<double> fixture_axis_values(const std::string& dim, std::int64_t length,
                                        std::int64_t file_index, std::int64_t time_len) {
    std::vector<double> values(static_cast<std::size_t>(length));
    if (dim == "time") {
        for (std::int64_t j = 0; j < length; ++j)
            values[static_cast<std::size_t>(j)] = static_cast<double>(file_index * time_len + j);
    } else if (dim == "lat") {
        double step = length > 1 ? 180.0 / static_cast<double>(length - 1) : 0.0;
        for (std::int64_t j = 0; j < length; ++j)
            values[static_cast<std::size_t>(j)] = 90.0 - step * static_cast<double>(j);
    } else if (dim == "lon") {
        double step = 360.0 / static_cast<double>(length);
        for (std::int64_t j = 0; j < length; ++j)
            values[static_cast<std::size_t>(j)] = step * static_cast<double>(j);
    } else {
        for (std::int64_t j = 0; j < length; ++j) values[static_cast<std::size_t>(j)] = static_cast<double>(j);
    }
    return values;
}

FillFn fixture_fill(const FixtureVar& var) {
    if (var.preset == "coord-sum")
        return [](std::span<const double> coords) { return std::accumulate(coords.begin(), coords.end(), 0.0); };
    if (var.preset == "constant") {
        double c = var.arg;
        return [c](std::span<const double>) { return c; };
    }
    if (var.preset == "sinusoidal")
        return [](std::span<const double> coords) {
            return std::sin(std::accumulate(coords.begin(), coords.end(), 0.0));
        };
    fail(Errc::InvalidParams, "unknown fill preset '" + var.preset + "'");
}

std::vector<std::string> generate_fixture(const FixtureSpec& spec) {
    if (spec.dims.empty()) fail(Errc::InvalidParams, "a fixture needs at least one dimension");
    if (spec.files < 1) fail(Errc::InvalidParams, "a fixture needs at least one file");
    for (const auto& [name, len] : spec.dims)
        if (len < 1) fail(Errc::InvalidParams, "dimension '" + name + "' must have positive length");

    std::filesystem::create_directories(spec.out_dir);

    FileSchema schema;
    std::int64_t time_len = 1;
    for (const auto& [name, len] : spec.dims) {
        schema.dimensions.push_back({name, static_cast<std::uint32_t>(len)});
        VarDef coord;
        coord.name = name;
        coord.type = ElemType::Double;
        coord.dims = {name};
        if (name == "time") {
            coord.attrs.emplace_back("units", AttrValue::of_text(spec.time_units));
            time_len = len;
        }
        schema.variables.push_back(std::move(coord));
    }
    std::vector<std::string> all_dims;
    for (const auto& [name, len] : spec.dims) all_dims.push_back(name);
    std::map<std::string, FillFn> fills;
    for (const FixtureVar& v : spec.vars) {
        VarDef def;
        def.name = v.name;
        def.type = ElemType::Double;
        def.dims = all_dims;
        schema.variables.push_back(std::move(def));
        fills[v.name] = fixture_fill(v);
    }

    std::vector<std::string> paths;
    paths.reserve(static_cast<std::size_t>(spec.files));
    for (int f = 0; f < spec.files; ++f) {
        char name[64];
        std::snprintf(name, sizeof name, "%s-%04d.nc", spec.prefix.c_str(), f);
        std::string path = (std::filesystem::path(spec.out_dir) / name).string();

        std::vector<CoordinateAxis> axes;
        for (const auto& [dim, len] : spec.dims) {
            CoordinateAxis axis;
            axis.dim_name = dim;
            axis.values = fixture_axis_values(dim, len, f, time_len);
            axis.ascending = axis.values.size() < 2 || axis.values[1] > axis.values[0];
            axes.push_back(std::move(axis));
        }
        write_grid_file(path, schema, axes, fills);
        paths.push_back(std::move(path));
    }
    return paths;
}

} // namespace gridlight
