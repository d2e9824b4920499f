#include "gridlight/blockcover.hpp"
#include "gridlight/engine.hpp"
#include "gridlight/fixture.hpp"
#include "gridlight/textutil.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

namespace py = pybind11;
using namespace gridlight;

namespace {

std::vector<TabularColumn> to_columns(const std::vector<std::pair<std::string, std::string>>& cols) {
    std::vector<TabularColumn> out;
    out.reserve(cols.size());
    for (const auto& [name, type] : cols) out.push_back({name, column_type_from_string(type)});
    return out;
}

py::object cell_to_py(const Column& col, std::size_t row) {
    switch (col.type) {
        case ColumnType::Text: return py::cast(col.texts[row]);
        case ColumnType::Int64: return py::cast(col.ints[row]);
        case ColumnType::Timestamp: {
            double v = col.nums[row];
            if (std::isnan(v)) return py::cast(v);
            return py::cast(format_timestamp(static_cast<std::int64_t>(v)));
        }
        default: return py::cast(col.nums[row]);
    }
}

py::dict stats_to_py(const QueryStats& stats) {
    py::dict out;
    out["bytes_read"] = stats.bytes_read;
    out["files_scanned"] = stats.files_scanned;
    out["files_skipped"] = stats.files_skipped;
    out["blocks_loaded"] = stats.blocks_loaded;
    out["rows_emitted"] = stats.rows_emitted;
    out["wall_ms"] = stats.wall_ms;
    py::dict per_dataset;
    for (const auto& [name, bytes] : stats.bytes_by_dataset) per_dataset[py::cast(name)] = bytes;
    out["bytes_by_dataset"] = per_dataset;
    return out;
}

py::dict result_to_py(const QueryResult& result) {
    py::list columns;
    for (const auto& c : result.columns)
        columns.append(py::make_tuple(c.name, column_type_name(c.type)));
    py::list rows;
    for (const RowBatch& b : result.batches)
        for (std::size_t r = 0; r < b.rows; ++r) {
            py::list row;
            for (std::size_t c = 0; c < result.columns.size(); ++c) row.append(cell_to_py(b.columns[c], r));
            rows.append(row);
        }
    py::dict out;
    out["columns"] = columns;
    out["rows"] = rows;
    out["stats"] = stats_to_py(result.stats);
    return out;
}

EngineOptions make_options(int workers, std::int64_t max_cells, std::int64_t dnf_cap) {
    EngineOptions opts;
    opts.workers = workers;
    opts.max_cells = max_cells;
    opts.dnf_clause_cap = dnf_cap;
    return opts;
}

py::dict cover_stats_to_py(const CoverStats& s) {
    py::dict out;
    out["input_blocks"] = s.input_blocks;
    out["sub_blocks_created"] = s.sub_blocks_created;
    out["duplicates_removed"] = s.duplicates_removed;
    out["merges_performed"] = s.merges_performed;
    out["output_blocks"] = s.output_blocks;
    return out;
}

} // namespace

PYBIND11_MODULE(_gridlight, m) {
    m.doc() = "Pushdown-optimizing query engine for gridded binary datasets";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "GridlightError");

    py::class_<Block>(m, "Block")
        .def(py::init<std::vector<std::string>, std::vector<std::int64_t>, std::vector<std::int64_t>>(),
             py::arg("dims"), py::arg("start"), py::arg("end"))
        .def_readonly("dims", &Block::dims)
        .def_readonly("start", &Block::start)
        .def_readonly("end", &Block::end)
        .def("cells", &Block::cells)
        .def("__eq__", [](const Block& a, const Block& b) { return a == b; })
        .def("__repr__", [](const Block& b) { return "Block" + to_string(b); });

    py::class_<Catalog>(m, "Catalog")
        .def(py::init<>())
        .def(
            "register_grid_dataset",
            [](Catalog& cat, const std::string& name, std::vector<std::string> files,
               std::vector<std::string> spanning) {
                cat.register_grid_dataset(name, std::move(files), std::move(spanning));
            },
            py::arg("name"), py::arg("files"), py::arg("spanning") = std::vector<std::string>{})
        .def(
            "register_tabular_dataset",
            [](Catalog& cat, const std::string& name, std::vector<std::string> files,
               const std::vector<std::pair<std::string, std::string>>& columns, const std::string& delimiter) {
                cat.register_tabular_dataset(name, std::move(files), to_columns(columns),
                                             delimiter.empty() ? ',' : delimiter[0]);
            },
            py::arg("name"), py::arg("files"), py::arg("columns"), py::arg("delimiter") = ",")
        .def("attach_envelopes",
             [](Catalog& cat, const std::string& name, const std::vector<std::string>& dims) {
                 cat.set_envelopes(name, compute_envelopes(cat.get(name), dims));
             })
        .def("names", &Catalog::names)
        .def("contains", &Catalog::contains)
        .def("save_manifest", &Catalog::save_manifest)
        .def_static("load_manifest", &Catalog::load_manifest);

    m.def(
        "query",
        [](const Catalog& catalog, const std::string& text, int workers, std::int64_t max_cells,
           std::int64_t dnf_cap) {
            Engine engine(catalog, make_options(workers, max_cells, dnf_cap));
            return result_to_py(engine.run(text));
        },
        py::arg("catalog"), py::arg("text"), py::arg("workers") = 0,
        py::arg("max_cells") = std::int64_t{1} << 22, py::arg("dnf_cap") = 4096,
        "Run a query; returns {'columns', 'rows', 'stats'}.");

    m.def(
        "explain",
        [](const Catalog& catalog, const std::string& text) { return Engine(catalog).explain(text); },
        py::arg("catalog"), py::arg("text"), "Render the rewritten plan without reading variable data.");

    m.def(
        "generate_fixture",
        [](const std::string& out_dir, const std::vector<std::pair<std::string, std::int64_t>>& dims,
           int files, const std::vector<std::tuple<std::string, std::string, double>>& vars,
           const std::string& prefix, const std::string& time_units) {
            FixtureSpec spec;
            spec.out_dir = out_dir;
            spec.dims = dims;
            spec.files = files;
            for (const auto& [name, preset, arg] : vars) spec.vars.push_back({name, preset, arg});
            spec.prefix = prefix;
            spec.time_units = time_units;
            return generate_fixture(spec);
        },
        py::arg("out_dir"), py::arg("dims"), py::arg("files") = 1,
        py::arg("vars") = std::vector<std::tuple<std::string, std::string, double>>{{"sp", "coord-sum", 0.0}},
        py::arg("prefix") = "fx", py::arg("time_units") = "hours since 2017-01-01 00:00:00",
        "Write a synthetic multi-file gridded dataset with analytic fills.");

    m.def(
        "cover_naive",
        [](const std::vector<Block>& blocks, std::int64_t cap) {
            CoverOptions opts;
            opts.naive_cap = cap;
            auto [cover, stats] = cover_naive(blocks, opts);
            return py::make_tuple(cover, cover_stats_to_py(stats));
        },
        py::arg("blocks"), py::arg("cap") = 10'000'000);

    m.def("cover_optimized", [](const std::vector<Block>& blocks) {
        auto [cover, stats] = cover_optimized(blocks);
        return py::make_tuple(cover, cover_stats_to_py(stats));
    });

    m.def(
        "generate_workload",
        [](const std::string& kind, int n, int d, std::uint64_t seed) {
            return generate_workload(workload_kind_from_string(kind), n, d, seed);
        },
        py::arg("kind"), py::arg("n"), py::arg("d"), py::arg("seed") = 42);

    m.def("split_for_memory", &split_for_memory, py::arg("block"), py::arg("max_cells"),
          py::arg("fastest_dim"));

    m.def("blocks_disjoint", &blocks_disjoint);

    m.def(
        "covers_equal",
        [](const std::vector<Block>& a, const std::vector<Block>& b, const std::vector<std::int64_t>& domain) {
            return rasterize(a, domain) == rasterize(b, domain);
        },
        py::arg("a"), py::arg("b"), py::arg("domain"),
        "Exact cell-set equality of two block lists over a rectangular domain.");

    m.def(
        "rasterize_count",
        [](const std::vector<Block>& blocks, const std::vector<std::int64_t>& domain) {
            return rasterize(blocks, domain).count();
        },
        py::arg("blocks"), py::arg("domain"));
}
