// Acceptance suite. Each test case covers one criterion and prints a single
// PASS/FAIL line so the whole gate is readable from the ctest log.

#include "gridlight/blockcover.hpp"
#include "gridlight/engine.hpp"
#include "gridlight/fixture.hpp"

#include "support/oracle.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>

using namespace gridlight;
using namespace gridlight::testing;

namespace {

struct Reporter {
    int id;
    const char* name;
    bool done = false;

    Reporter(int id, const char* name) : id(id), name(name) {}
    void pass(const std::string& note = "") {
        done = true;
        std::printf("criterion %2d PASS  %s%s%s\n", id, name, note.empty() ? "" : " -- ", note.c_str());
        std::fflush(stdout);
    }
    ~Reporter() {
        if (!done) {
            std::printf("criterion %2d FAIL  %s\n", id, name);
            std::fflush(stdout);
        }
    }
};

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    double s() const { return ms() / 1000.0; }
};

std::string two(int v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d", v);
    return buf;
}

// quarter-degree single-file grid matching the documented translation example
Catalog quarter_degree_catalog(const TempDir& dir) {
    FixtureSpec spec;
    spec.out_dir = dir.file("era");
    spec.dims = {{"time", 1}, {"lat", 721}, {"lon", 1440}};
    spec.files = 1;
    spec.vars = {{"sp", "coord-sum", 0.0}};
    auto files = generate_fixture(spec);
    Catalog catalog;
    catalog.register_grid_dataset("era_b", files, {"time"});
    return catalog;
}

// 24 hourly files, 1 x 73 x 144, six equal f64 variables
Catalog day_catalog(const TempDir& dir, const std::string& name = "era24") {
    FixtureSpec spec;
    spec.out_dir = dir.file(name);
    spec.dims = {{"time", 1}, {"lat", 73}, {"lon", 144}};
    spec.files = 24;
    spec.vars = {{"v1", "coord-sum", 0.0}, {"v2", "constant", 2.0},   {"v3", "sinusoidal", 0.0},
                 {"v4", "constant", 4.0},  {"v5", "coord-sum", 0.0},  {"v6", "constant", 6.0}};
    auto files = generate_fixture(spec);
    Catalog catalog;
    catalog.register_grid_dataset(name, files, {"time"});
    return catalog;
}

const char* kQ1 =
    "SELECT time, lat, lon, sp FROM era_b "
    "WHERE time > '2017-01-01 00:15:00' AND lat > 20.2 AND lat < 60.5";

const char* kQ2 =
    "SELECT time, lat, lon, sp FROM era_b "
    "WHERE lon >= 90.0 AND NOT (lat == 0.0 AND lon >= 163.0 AND lon <= 163.75)";

} // namespace

TEST_CASE("criterion 1") {
    Reporter r(1, "Listing-2 translation on the quarter-degree grid");
    TempDir dir("acc1");
    Catalog catalog = quarter_degree_catalog(dir);
    Engine engine(catalog);

    Stopwatch watch;
    std::string text = engine.explain(kQ1);
    double elapsed = watch.s();

    REQUIRE(text.find("latPos >= 119 AND latPos <= 279") != std::string::npos);
    REQUIRE(text.find("lonPos >= 0 AND lonPos <= 1439") != std::string::npos);
    REQUIRE(text.find("time > '2017-01-01 00:15:00'") != std::string::npos);
    REQUIRE(elapsed < 1.0);
    r.pass("explain in " + format_number(elapsed) + " s");
}

TEST_CASE("criterion 2") {
    Reporter r(2, "Listing-6 DNF of the non-convex predicate");
    TempDir dir("acc2");
    Catalog catalog = quarter_degree_catalog(dir);

    Stopwatch watch;
    BoundQuery q = bind(parse_query(kQ2), catalog);
    DnfPredicate dnf = normalize_to_dnf(*q.where);
    double elapsed = watch.s();

    REQUIRE(dnf.clauses.size() == 4);
    auto clause_set = [&](std::size_t i) {
        std::vector<std::string> atoms;
        for (const BoundAtom& a : dnf.clauses[i].atoms) atoms.push_back(print_bound_atom(a));
        std::sort(atoms.begin(), atoms.end());
        return atoms;
    };
    std::vector<std::vector<std::string>> got;
    for (std::size_t i = 0; i < 4; ++i) got.push_back(clause_set(i));
    std::sort(got.begin(), got.end());
    std::vector<std::vector<std::string>> expected = {
        {"lat < 0", "lon >= 90"},
        {"lat > 0", "lon >= 90"},
        {"lon < 163", "lon >= 90"},
        {"lon > 163.75", "lon >= 90"},
    };
    std::sort(expected.begin(), expected.end());
    REQUIRE(got == expected);
    REQUIRE(elapsed < 1.0);
    r.pass("4 clauses");
}

TEST_CASE("criterion 3") {
    Reporter r(3, "naive-cover trace: 12 sub-blocks, 8 after dedup, 4 final");
    TempDir dir("acc3");
    Catalog catalog = quarter_degree_catalog(dir);
    Engine engine(catalog);

    Stopwatch watch;
    PhysicalPlan plan = engine.plan(bind(parse_query(kQ2), catalog));
    REQUIRE(plan.from_scan.locals.size() == 1);
    const LocalPlan& local = plan.from_scan.locals[0];
    REQUIRE(local.clauses.size() == 4);

    // the per-clause candidate blocks, before overlap elimination
    std::vector<Block> candidates;
    for (const ClauseFilter& clause : local.clauses) {
        Block b;
        b.dims = {"time", "lat", "lon"};
        for (const PositionalInterval& iv : clause.intervals) {
            b.start.push_back(iv.lo);
            b.end.push_back(iv.hi);
        }
        candidates.push_back(std::move(b));
    }
    auto [cover, stats] = cover_naive(candidates);
    double elapsed = watch.s();

    REQUIRE(stats.sub_blocks_created == 12);
    REQUIRE(stats.duplicates_removed == 4);
    REQUIRE(stats.sub_blocks_created - stats.duplicates_removed == 8);
    REQUIRE(stats.output_blocks == 4);
    REQUIRE(blocks_disjoint(cover));
    REQUIRE(rasterize(cover, {1, 721, 1440}) == rasterize(candidates, {1, 721, 1440}));
    REQUIRE(local.blocks.size() <= 4); // the planner's own cover is disjoint too
    REQUIRE(elapsed < 1.0);
    r.pass();
}

TEST_CASE("criterion 4") {
    Reporter r(4, "strategy equivalence on random and generated workloads");
    Stopwatch watch;
    std::mt19937_64 rng(20240809);

    CoverOptions raised;
    raised.naive_cap = 200'000'000;

    int runs = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        int d = 1 + static_cast<int>(rng() % 3);
        int n = 1 + static_cast<int>(rng() % 32);
        std::vector<std::string> dims;
        for (int k = 0; k < d; ++k) dims.push_back("d" + std::to_string(k));
        std::vector<Block> blocks;
        for (int i = 0; i < n; ++i) {
            std::vector<std::int64_t> start(static_cast<std::size_t>(d)), end(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k) {
                std::int64_t a = static_cast<std::int64_t>(rng() % 12);
                std::int64_t b = static_cast<std::int64_t>(rng() % 12);
                start[static_cast<std::size_t>(k)] = std::min(a, b);
                end[static_cast<std::size_t>(k)] = std::max(a, b);
            }
            blocks.emplace_back(dims, std::move(start), std::move(end));
        }
        std::vector<std::int64_t> domain(static_cast<std::size_t>(d), 12);
        CellSet expected = rasterize(blocks, domain);
        auto [naive, ns] = cover_naive(blocks, raised);
        auto [opt, os] = cover_optimized(blocks);
        REQUIRE(rasterize(naive, domain) == expected);
        REQUIRE(rasterize(opt, domain) == expected);
        REQUIRE(blocks_disjoint(naive));
        REQUIRE(blocks_disjoint(opt));
        ++runs;
    }

    for (auto kind : {WorkloadKind::Aligned, WorkloadKind::Misaligned, WorkloadKind::Diagonal,
                      WorkloadKind::Centered}) {
        for (int n : {2, 4, 8, 16, 32, 64}) {
            for (int d : {1, 2, 3}) {
                auto blocks = generate_workload(kind, n, d, 4242);
                std::vector<std::int64_t> domain(static_cast<std::size_t>(d), 1);
                for (const Block& b : blocks)
                    for (int k = 0; k < d; ++k)
                        domain[static_cast<std::size_t>(k)] =
                            std::max(domain[static_cast<std::size_t>(k)], b.end[static_cast<std::size_t>(k)] + 1);
                CellSet expected = rasterize(blocks, domain);
                auto [naive, ns] = cover_naive(blocks, raised);
                auto [opt, os] = cover_optimized(blocks);
                REQUIRE(rasterize(naive, domain) == expected);
                REQUIRE(rasterize(opt, domain) == expected);
                REQUIRE(blocks_disjoint(naive));
                REQUIRE(blocks_disjoint(opt));
                ++runs;
            }
        }
    }

    double elapsed = watch.s();
    REQUIRE(elapsed < 60.0);
    r.pass(std::to_string(runs) + " inputs in " + format_number(elapsed) + " s");
}

TEST_CASE("criterion 5") {
    Reporter r(5, "horizontal pruning: bytes scale with the selected lat range");
    TempDir dir("acc5");
    Catalog catalog = day_catalog(dir);
    Engine engine(catalog);

    Stopwatch watch;
    auto bytes_for = [&](const std::string& where, std::int64_t rows_expected) {
        QueryResult res = engine.run("SELECT mean(v1) FROM era24" + where);
        REQUIRE(res.stats.bytes_read ==
                static_cast<std::uint64_t>(24 * rows_expected * 144 * 8)); // one f64 variable
        return res.stats.bytes_read;
    };

    // lat >= 46.25 keeps 18 of 73 rows (24.7%), lat >= 1.25 keeps 36 (49.3%)
    std::uint64_t full = bytes_for("", 73);
    std::uint64_t half = bytes_for(" WHERE lat >= 1.25", 36);
    std::uint64_t quarter = bytes_for(" WHERE lat >= 46.25", 18);

    auto one_block = static_cast<double>(24 * 1 * 144 * 8); // one lat row per file
    REQUIRE(std::fabs(static_cast<double>(quarter) - 0.25 * static_cast<double>(full)) <=
            one_block * 24);
    REQUIRE(std::fabs(static_cast<double>(half) - 0.50 * static_cast<double>(full)) <= one_block * 24);
    double elapsed = watch.s();
    REQUIRE(elapsed < 30.0);
    r.pass("bytes " + std::to_string(quarter) + "/" + std::to_string(half) + "/" + std::to_string(full));
}

TEST_CASE("criterion 6") {
    Reporter r(6, "vertical pruning: bytes scale exactly with projected variables");
    TempDir dir("acc6");
    Catalog catalog = day_catalog(dir);
    Engine engine(catalog);

    Stopwatch watch;
    const std::uint64_t all6 = static_cast<std::uint64_t>(24) * 73 * 144 * 8 * 6;
    QueryResult one = engine.run("SELECT mean(v1) FROM era24");
    QueryResult three = engine.run("SELECT mean(v1), mean(v2), mean(v3) FROM era24");
    QueryResult six = engine.run("SELECT mean(v1), mean(v2), mean(v3), mean(v4), mean(v5), mean(v6) FROM era24");
    REQUIRE(one.stats.bytes_read == all6 / 6);
    REQUIRE(three.stats.bytes_read == all6 / 2);
    REQUIRE(six.stats.bytes_read == all6);
    double elapsed = watch.s();
    REQUIRE(elapsed < 30.0);
    r.pass("1/6, 3/6 and 6/6 of " + std::to_string(all6) + " bytes");
}

TEST_CASE("criterion 7") {
    Reporter r(7, "local rewriting skips files outside the time predicate");
    TempDir dir("acc7");
    Catalog catalog = day_catalog(dir);
    Engine engine(catalog);

    // hours 20..23 satisfy the predicate; 20 of 24 files are eliminated
    QueryResult res = engine.run(
        "SELECT v1 FROM era24 WHERE time > '2017-01-01 19:15:00' AND lat > 20.2 AND lat < 60.5");
    REQUIRE(res.stats.files_skipped == 20);
    REQUIRE(res.stats.files_scanned == 4);
    std::int64_t skipped_seen = 0;
    for (const FileStats& fs : res.stats.per_file) {
        if (fs.skipped) {
            REQUIRE(fs.bytes == 0);
            ++skipped_seen;
        }
    }
    REQUIRE(skipped_seen == 20);
    // lat in (20.2, 60.5) on the 2.5-degree grid: positions 12..27, 16 rows
    REQUIRE(res.row_count() == 4 * 16 * 144);
    r.pass("files_skipped=20, skipped files read 0 bytes");
}

TEST_CASE("criterion 8") {
    Reporter r(8, "envelope join: identical result, <=15% probe bytes, lower wall time");
    TempDir dir("acc8");
    Catalog catalog = day_catalog(dir);

    // tabular side: a 10.2%-volume sub-box (6 of 24 hours, 37 of 73 lats,
    // 116 of 144 lons), one row per covered grid point
    std::string csv = dir.file("nao.csv");
    {
        std::ofstream out(csv);
        out << "time,lat,lon,sp\n";
        for (int h = 12; h <= 17; ++h)
            for (int la = 18; la <= 54; ++la)
                for (int lo = 0; lo <= 115; ++lo)
                    out << "2017-01-01 " << two(h) << ":00:00," << format_number(90.0 - 2.5 * la) << ","
                        << format_number(2.5 * lo) << "," << format_number(1000.0 + h + la + lo) << "\n";
    }
    catalog.register_tabular_dataset("nao", {csv},
                                     {{"time", ColumnType::Timestamp},
                                      {"lat", ColumnType::Float64},
                                      {"lon", ColumnType::Float64},
                                      {"sp", ColumnType::Float64}});

    const std::string query =
        "SELECT nao.time, nao.lat, nao.lon, sp, v1 FROM nao JOIN era24 "
        "ON nao.time = era24.time AND nao.lat = era24.lat AND nao.lon = era24.lon";

    Engine plain_engine(catalog);
    Stopwatch plain_watch;
    QueryResult plain = plain_engine.run(query);
    double plain_wall = plain_watch.s();

    Engine env_engine(catalog);
    Stopwatch env_watch;
    env_engine.attach_envelopes("nao", {"time", "lat", "lon"});
    QueryResult pruned = env_engine.run(query);
    double env_wall = env_watch.s();

    REQUIRE(plain.row_count() == 6 * 37 * 116);
    std::string diag;
    REQUIRE_MESSAGE(row_sets_equal(result_to_text(plain), result_to_text(pruned), 0.0, &diag), diag);

    std::uint64_t plain_bytes = plain.stats.bytes_by_dataset.at("era24");
    std::uint64_t pruned_bytes = pruned.stats.bytes_by_dataset.at("era24");
    REQUIRE(pruned_bytes <= plain_bytes * 15 / 100);
    REQUIRE(env_wall < plain_wall);
    REQUIRE(plain_watch.s() < 60.0);
    r.pass("bytes " + std::to_string(pruned_bytes) + "/" + std::to_string(plain_bytes) + ", wall " +
           format_number(env_wall) + "s vs " + format_number(plain_wall) + "s");
}

TEST_CASE("criterion 9") {
    Reporter r(9, "200 random queries match the brute-force evaluator");
    TempDir dir("acc9");

    FixtureSpec spec;
    spec.out_dir = dir.file("grid");
    spec.dims = {{"time", 1}, {"lat", 18}, {"lon", 24}};
    spec.files = 6;
    spec.vars = {{"va", "coord-sum", 0.0}, {"vb", "sinusoidal", 0.0}, {"vc", "constant", 7.5}};
    Catalog catalog;
    catalog.register_grid_dataset("g", generate_fixture(spec), {"time"});
    Engine engine(catalog);

    Stopwatch watch;
    std::mt19937_64 rng(1234567);

    auto num = [&](double v) { return format_number(v); };
    auto lat_value = [&](bool off) {
        double v = 90.0 - (180.0 / 17.0) * static_cast<double>(rng() % 18);
        return v + (off ? 0.05 : 0.0);
    };
    auto lon_value = [&](bool off) {
        double v = 15.0 * static_cast<double>(rng() % 24);
        return v + (off ? 0.5 : 0.0);
    };
    auto time_value = [&] { return "'2017-01-01 " + two(static_cast<int>(rng() % 7)) + ":" +
                                   (rng() % 2 ? "30" : "00") + ":00'"; };

    std::function<std::string(int)> gen_pred = [&](int depth) -> std::string {
        if (depth == 0 || rng() % 3 == 0) {
            const char* cmp_ops[] = {"<", "<=", ">", ">=", "==", "!="};
            std::string op = cmp_ops[rng() % 6];
            switch (rng() % 7) {
                case 0: return "lat " + op + " " + num(lat_value(rng() % 3 == 0));
                case 1: return "lon " + op + " " + num(lon_value(rng() % 3 == 0));
                case 2: return "time " + op + " " + time_value();
                case 3: return "latPos " + op + " " + num(static_cast<double>(rng() % 20));
                case 4: return "lonPos " + op + " " + num(static_cast<double>(rng() % 26));
                case 5: {
                    std::string v = rng() % 2 ? "va" : "vb";
                    double t = v == "va" ? static_cast<double>(rng() % 400) - 100.0
                                         : (static_cast<double>(rng() % 20) - 10.0) / 10.0;
                    return v + " " + op + " " + num(t);
                }
                default: {
                    std::string list = num(lat_value(false));
                    for (std::uint64_t i = rng() % 3; i > 0; --i) list += ", " + num(lat_value(false));
                    return std::string("lat ") + (rng() % 2 ? "IN (" : "NOT IN (") + list + ")";
                }
            }
        }
        switch (rng() % 3) {
            case 0: return "NOT (" + gen_pred(depth - 1) + ")";
            case 1: return "(" + gen_pred(depth - 1) + " AND " + gen_pred(depth - 1) + ")";
            default: return "(" + gen_pred(depth - 1) + " OR " + gen_pred(depth - 1) + ")";
        }
    };

    auto gen_expr = [&]() -> std::string {
        switch (rng() % 5) {
            case 0: return "va";
            case 1: return "vb";
            case 2: return "va * 2 - vb";
            case 3: return "sqrt(abs(va) + 1)";
            default: return "lat + lon";
        }
    };

    auto gen_query = [&]() -> std::string {
        std::string q = "SELECT ";
        if (rng() % 2) {
            switch (rng() % 5) {
                case 0: q += "count(*)"; break;
                case 1: q += "min(" + gen_expr() + "), max(" + gen_expr() + ")"; break;
                case 2: q += "mean(" + gen_expr() + "), count(*)"; break;
                case 3: q += "mean(va), mean(vb), mean(vc)"; break;
                default:
                    q += "histogram(" + gen_expr() + ", -50, 350, " + std::to_string(2 + rng() % 7) + ")";
            }
        } else {
            const char* cols[] = {"file", "time", "lat", "latPos", "lon", "lonPos", "va", "vb", "vc"};
            std::size_t n = 1 + rng() % 4;
            for (std::size_t i = 0; i < n; ++i) q += std::string(i ? ", " : "") + cols[rng() % 9];
            if (rng() % 4 == 0) q += ", " + gen_expr();
        }
        q += " FROM g";
        if (rng() % 5 != 0) q += " WHERE " + gen_pred(1 + static_cast<int>(rng() % 3));
        return q;
    };

    for (int i = 0; i < 200; ++i) {
        std::string text = gen_query();
        QueryAst ast = parse_query(text);
        auto expected = oracle_run(ast, catalog);
        QueryResult got = engine.run(text);
        std::string diag;
        REQUIRE_MESSAGE(row_sets_equal(result_to_text(got), expected, 1e-12, &diag),
                        "query " << i << ": " << text << " -- " << diag);
    }
    double elapsed = watch.s();
    REQUIRE(elapsed < 120.0);
    r.pass("200 queries in " + format_number(elapsed) + " s");
}

TEST_CASE("criterion 10") {
    Reporter r(10, "naive blow-up guard trips; optimized completes quickly");
    auto blocks = generate_workload(WorkloadKind::Diagonal, 256, 4, 99);

    bool tripped = false;
    try {
        cover_naive(blocks);
    } catch (const Error& e) {
        tripped = e.code() == Errc::CoverTooLarge;
    }
    REQUIRE(tripped);

    Stopwatch watch;
    auto [cover, stats] = cover_optimized(blocks);
    double elapsed = watch.s();
    REQUIRE(elapsed < 10.0);
    REQUIRE(blocks_disjoint(cover));

    // the diagonal blocks sit inside the first block, so the union is exactly
    // that box; disjointness plus the cell-count identity pins the cover
    std::int64_t total = 0;
    for (const Block& b : cover) {
        total += b.cells();
        for (std::size_t k = 0; k < b.rank(); ++k) {
            REQUIRE(b.start[k] >= blocks[0].start[k]);
            REQUIRE(b.end[k] <= blocks[0].end[k]);
        }
    }
    REQUIRE(total == blocks[0].cells());
    r.pass("optimized in " + format_number(elapsed) + " s, " + std::to_string(stats.output_blocks) +
           " blocks");
}

TEST_CASE("criterion 11") {
    Reporter r(11, "100 random schemas round-trip byte- and value-exactly");
    TempDir dir("acc11");
    Stopwatch watch;
    std::mt19937_64 rng(31337);
    const ElemType types[] = {ElemType::Byte, ElemType::Char,  ElemType::Short,
                              ElemType::Int,  ElemType::Float, ElemType::Double};

    auto cast_like_storage = [](ElemType t, double v) -> double {
        switch (t) {
            case ElemType::Byte: return static_cast<double>(static_cast<std::int8_t>(v));
            case ElemType::Char: return static_cast<double>(static_cast<unsigned char>(v));
            case ElemType::Short: return static_cast<double>(static_cast<std::int16_t>(v));
            case ElemType::Int: return static_cast<double>(static_cast<std::int32_t>(v));
            case ElemType::Float: return static_cast<double>(static_cast<float>(v));
            case ElemType::Double: return v;
        }
        return v;
    };

    for (int iter = 0; iter < 100; ++iter) {
        FileSchema s;
        int ndims = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < ndims; ++k)
            s.dimensions.push_back({"d" + std::to_string(k), static_cast<std::uint32_t>(1 + rng() % 7)});

        std::vector<CoordinateAxis> axes;
        for (int k = 0; k < ndims; ++k) {
            if (rng() % 3 == 0) continue;
            const DimDef& d = s.dimensions[static_cast<std::size_t>(k)];
            s.variables.push_back({d.name, ElemType::Double, {d.name}, {}});
            CoordinateAxis axis;
            axis.dim_name = d.name;
            double step = 0.5 + static_cast<double>(rng() % 4);
            bool descending = rng() % 2;
            for (std::uint32_t j = 0; j < d.length; ++j)
                axis.values.push_back(descending ? 100.0 - step * j : step * j);
            axis.ascending = !descending;
            axes.push_back(std::move(axis));
        }

        struct VarFill {
            std::string name;
            ElemType type;
            double a, b;
        };
        std::vector<VarFill> var_fills;
        std::map<std::string, FillFn> fills;
        int nvars = 1 + static_cast<int>(rng() % 3);
        for (int v = 0; v < nvars; ++v) {
            VarDef var;
            var.name = "v" + std::to_string(v);
            var.type = types[rng() % 6];
            for (int k = 0; k < ndims; ++k)
                if (rng() % 2) var.dims.push_back(s.dimensions[static_cast<std::size_t>(k)].name);
            if (rng() % 2)
                var.attrs.emplace_back("units", AttrValue::of_text("hours since 2017-01-01 00:00:00"));
            if (rng() % 3 == 0)
                var.attrs.emplace_back("range", AttrValue::of_numbers(ElemType::Float, {0.5, 99.5}));
            double a = static_cast<double>(rng() % 50), b = 0.25 * static_cast<double>(rng() % 8);
            var_fills.push_back({var.name, var.type, a, b});
            s.variables.push_back(std::move(var));
            fills[var_fills.back().name] = [a, b](std::span<const double> c) {
                double sum = a;
                for (double x : c) sum += b * x;
                return sum;
            };
        }

        int version = rng() % 2 ? 1 : 2;
        std::string path_a = dir.file("a" + std::to_string(iter) + ".nc");
        std::string path_b = dir.file("b" + std::to_string(iter) + ".nc");
        write_grid_file(path_a, s, axes, fills, version);
        write_grid_file(path_b, s, axes, fills, version);

        // byte-exact: the writer is deterministic
        std::ifstream fa(path_a, std::ios::binary), fb(path_b, std::ios::binary);
        std::string bytes_a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
        std::string bytes_b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
        REQUIRE(bytes_a == bytes_b);

        GridFileHandle h = open_grid_file(path_a);
        REQUIRE(h.header() == s);

        // value-exact: every stored value equals the fill cast to the type
        for (const VarFill& vf : var_fills) {
            const VarDef& var = h.header().variables[static_cast<std::size_t>(h.header().find_var(vf.name))];
            std::vector<std::int64_t> start(var.dims.size(), 0), end, lens;
            for (const auto& dn : var.dims) {
                lens.push_back(s.dimensions[static_cast<std::size_t>(s.find_dim(dn))].length);
                end.push_back(lens.back() - 1);
            }
            NdArray arr = h.read_subarray(vf.name, Block(var.dims, start, end));

            std::vector<std::int64_t> idx(var.dims.size(), 0);
            std::vector<double> coords(var.dims.size());
            for (std::size_t flat = 0; flat < arr.elements.size(); ++flat) {
                for (std::size_t k = 0; k < var.dims.size(); ++k) {
                    const CoordinateAxis* axis = nullptr;
                    for (const auto& a : axes)
                        if (a.dim_name == var.dims[k]) axis = &a;
                    coords[k] = axis ? axis->values[static_cast<std::size_t>(idx[k])]
                                     : static_cast<double>(idx[k]);
                }
                double expect = cast_like_storage(vf.type, vf.a + [&] {
                    double sum = 0;
                    for (double c : coords) sum += vf.b * c;
                    return sum;
                }());
                REQUIRE(arr.elements[flat] == expect);
                for (std::size_t k = var.dims.size(); k-- > 0;) {
                    if (++idx[k] < lens[k]) break;
                    idx[k] = 0;
                }
            }
        }
    }
    double elapsed = watch.s();
    REQUIRE(elapsed < 30.0);
    r.pass("100 schemas in " + format_number(elapsed) + " s");
}
