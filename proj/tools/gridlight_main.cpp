#include "gridlight/blockcover.hpp"
#include "gridlight/engine.hpp"
#include "gridlight/fixture.hpp"
#include "gridlight/textutil.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace gridlight;

namespace {

// ------------------------------------------------------------------- utility

bool glob_match(const std::string& pattern, const std::string& name) {
    std::size_t p = 0, n = 0, star = std::string::npos, mark = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

// matches are stored as absolute paths so the manifest works from any cwd
std::vector<std::string> expand_globs(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (const std::string& arg : args) {
        if (arg.find_first_of("*?") == std::string::npos) {
            out.push_back(fs::absolute(arg).lexically_normal().string());
            continue;
        }
        fs::path pattern(arg);
        fs::path dir = pattern.parent_path().empty() ? fs::path(".") : pattern.parent_path();
        std::string leaf = pattern.filename().string();
        std::vector<std::string> matched;
        if (fs::is_directory(dir))
            for (const auto& entry : fs::directory_iterator(dir))
                if (glob_match(leaf, entry.path().filename().string()))
                    matched.push_back(fs::absolute(entry.path()).lexically_normal().string());
        std::sort(matched.begin(), matched.end());
        out.insert(out.end(), matched.begin(), matched.end());
    }
    return out;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == sep) {
            if (i > start) out.push_back(text.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::string format_cell(const Column& col, std::size_t row) {
    switch (col.type) {
        case ColumnType::Text: return col.texts[row];
        case ColumnType::Int64: return format_int(col.ints[row]);
        case ColumnType::Timestamp: {
            double v = col.nums[row];
            if (std::isnan(v)) return "nan";
            return format_timestamp(static_cast<std::int64_t>(v));
        }
        default: return format_number(col.nums[row]);
    }
}

void print_result(const QueryResult& result, const std::string& format) {
    if (format == "table") {
        std::vector<std::size_t> width(result.columns.size());
        for (std::size_t c = 0; c < result.columns.size(); ++c) width[c] = result.columns[c].name.size();
        std::vector<std::vector<std::string>> rows;
        for (const RowBatch& b : result.batches)
            for (std::size_t r = 0; r < b.rows; ++r) {
                std::vector<std::string> row(result.columns.size());
                for (std::size_t c = 0; c < result.columns.size(); ++c) {
                    row[c] = format_cell(b.columns[c], r);
                    width[c] = std::max(width[c], row[c].size());
                }
                rows.push_back(std::move(row));
            }
        auto pad = [&](const std::string& s, std::size_t w) {
            return s + std::string(w - s.size(), ' ');
        };
        for (std::size_t c = 0; c < result.columns.size(); ++c)
            std::cout << (c ? "  " : "") << pad(result.columns[c].name, width[c]);
        std::cout << "\n";
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) std::cout << (c ? "  " : "") << pad(row[c], width[c]);
            std::cout << "\n";
        }
        return;
    }
    for (std::size_t c = 0; c < result.columns.size(); ++c)
        std::cout << (c ? "," : "") << result.columns[c].name;
    std::cout << "\n";
    for (const RowBatch& b : result.batches)
        for (std::size_t r = 0; r < b.rows; ++r) {
            for (std::size_t c = 0; c < result.columns.size(); ++c)
                std::cout << (c ? "," : "") << format_cell(b.columns[c], r);
            std::cout << "\n";
        }
}

struct CliConfig {
    std::string manifest;
    int workers = 0;
    std::int64_t max_cells = std::int64_t{1} << 22;
    std::int64_t dnf_cap = 4096;
    std::string format = "csv";

    EngineOptions engine() const {
        EngineOptions opts;
        opts.workers = workers;
        opts.max_cells = max_cells;
        opts.dnf_clause_cap = dnf_cap;
        return opts;
    }
};

Catalog load_catalog(const CliConfig& cfg) {
    if (cfg.manifest.empty()) fail(Errc::InvalidParams, "no manifest; pass --manifest or set GRIDLIGHT_MANIFEST");
    if (!fs::exists(cfg.manifest)) return Catalog{};
    return Catalog::load_manifest(cfg.manifest);
}

// ------------------------------------------------------------------ register

int cmd_register(const CliConfig& cfg, const std::string& name, const std::vector<std::string>& file_args,
                 const std::string& spanning, const std::string& tabular, char delimiter) {
    try {
        Catalog catalog = load_catalog(cfg);
        std::vector<std::string> files = expand_globs(file_args);
        if (files.empty()) fail(Errc::EmptyFileList, "no files matched");
        bool replaced = catalog.contains(name);

        if (!tabular.empty()) {
            std::vector<TabularColumn> columns;
            for (const std::string& part : split_list(tabular, ',')) {
                auto colon = part.find(':');
                if (colon == std::string::npos)
                    fail(Errc::InvalidParams, "column spec '" + part + "' is not name:type");
                columns.push_back({part.substr(0, colon), column_type_from_string(part.substr(colon + 1))});
            }
            const DatasetDescriptor& ds = catalog.register_tabular_dataset(name, files, columns, delimiter);
            std::cout << "registered tabular dataset '" << name << "' (" << ds.files.size() << " files)\n";
            std::cout << "columns:";
            for (const auto& c : ds.columns) std::cout << " " << c.name << ":" << column_type_name(c.type);
            std::cout << "\n";
        } else {
            const DatasetDescriptor& ds =
                catalog.register_grid_dataset(name, files, split_list(spanning, ','));
            std::cout << "registered grid dataset '" << name << "' (" << ds.files.size() << " files)\n";
            std::cout << "dimensions:";
            for (const auto& d : ds.schema.dims) {
                std::cout << " " << d.name << "(" << d.length;
                if (d.spanning) std::cout << ", spanning";
                if (d.time_units) std::cout << ", timestamp";
                std::cout << ")";
            }
            std::cout << "\nvariables:";
            for (const auto& v : ds.schema.variables) std::cout << " " << v;
            std::cout << "\n";
        }
        if (replaced) std::cerr << "warning: dataset '" << name << "' replaced\n";
        catalog.save_manifest(cfg.manifest);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

// --------------------------------------------------------------------- query

int cmd_query(const CliConfig& cfg, std::string query_text, bool explain_only, bool stats,
              const std::string& envelope) {
    Catalog catalog;
    try {
        catalog = load_catalog(cfg);
        if (!query_text.empty() && query_text[0] == '@') {
            std::ifstream in(query_text.substr(1));
            if (!in) fail(Errc::IoFailure, "cannot open query file '" + query_text.substr(1) + "'");
            query_text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        Engine engine(std::move(catalog), cfg.engine());
        if (!envelope.empty()) {
            auto colon = envelope.find(':');
            if (colon == std::string::npos)
                fail(Errc::InvalidParams, "--envelope expects dataset:dim1,dim2,...");
            engine.attach_envelopes(envelope.substr(0, colon), split_list(envelope.substr(colon + 1), ','));
        }
        if (explain_only) {
            std::cout << engine.explain(query_text);
            return 0;
        }
        QueryResult result = engine.run(query_text);
        print_result(result, cfg.format);
        if (stats) std::cerr << result.stats.trailer();
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

// --------------------------------------------------------------- gen-fixture

int cmd_gen_fixture(const std::string& out_dir, const std::string& dims, int files, const std::string& vars,
                    const std::string& default_fill, const std::string& prefix) {
    try {
        FixtureSpec spec;
        spec.out_dir = out_dir;
        spec.files = files;
        spec.prefix = prefix;
        for (const std::string& part : split_list(dims, ',')) {
            auto colon = part.find(':');
            if (colon == std::string::npos) fail(Errc::InvalidParams, "dim spec '" + part + "' is not name:length");
            spec.dims.emplace_back(part.substr(0, colon), std::stoll(part.substr(colon + 1)));
        }
        for (const std::string& part : split_list(vars, ',')) {
            auto fields = split_list(part, ':');
            FixtureVar v;
            v.name = fields.at(0);
            v.preset = fields.size() > 1 ? fields[1] : default_fill;
            if (fields.size() > 2) v.arg = std::stod(fields[2]);
            spec.vars.push_back(std::move(v));
        }
        auto paths = generate_fixture(spec);
        std::cout << "wrote " << paths.size() << " files under " << out_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

// --------------------------------------------------------------- bench-cover

int cmd_bench_cover(const std::string& workload, const std::string& n_list, const std::string& d_list,
                    const std::string& strategy, std::uint64_t seed, std::int64_t cap,
                    std::int64_t max_raster_cells) {
    try {
        WorkloadKind kind = workload_kind_from_string(workload);
        bool run_naive = strategy == "both" || strategy == "naive";
        bool run_optimized = strategy == "both" || strategy == "optimized";
        if (!run_naive && !run_optimized) fail(Errc::InvalidParams, "--strategy must be both, naive or optimized");

        std::cout << "strategy,workload,n,d,wall_ms,input_blocks,sub_blocks,duplicates_removed,merges,output_blocks\n";
        for (const std::string& ns : split_list(n_list, ',')) {
            for (const std::string& ds : split_list(d_list, ',')) {
                int n = std::stoi(ns), d = std::stoi(ds);
                std::vector<Block> blocks = generate_workload(kind, n, d, seed);

                auto run = [&](const char* label, auto&& fn) {
                    auto t0 = std::chrono::steady_clock::now();
                    auto [cover, cover_stats] = fn();
                    double ms =
                        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                    std::cout << label << "," << workload << "," << n << "," << d << "," << format_number(ms)
                              << "," << cover_stats.input_blocks << "," << cover_stats.sub_blocks_created << ","
                              << cover_stats.duplicates_removed << "," << cover_stats.merges_performed << ","
                              << cover_stats.output_blocks << "\n";
                    return cover;
                };

                std::vector<Block> naive_cover, optimized_cover;
                CoverOptions copts;
                copts.naive_cap = cap;
                if (run_naive) naive_cover = run("naive", [&] { return cover_naive(blocks, copts); });
                if (run_optimized) optimized_cover = run("optimized", [&] { return cover_optimized(blocks); });

                // verify against the exact cell set when the domain is small enough
                std::vector<std::int64_t> domain(static_cast<std::size_t>(d), 0);
                for (const Block& b : blocks)
                    for (int k = 0; k < d; ++k)
                        domain[static_cast<std::size_t>(k)] =
                            std::max(domain[static_cast<std::size_t>(k)], b.end[static_cast<std::size_t>(k)] + 1);
                double volume = 1;
                for (std::int64_t len : domain) volume *= static_cast<double>(len);
                if (volume <= static_cast<double>(max_raster_cells)) {
                    CellSet expected = rasterize(blocks, domain);
                    auto check = [&](const char* label, const std::vector<Block>& cover) {
                        if (!(rasterize(cover, domain) == expected) || !blocks_disjoint(cover)) {
                            std::cerr << "MISMATCH: " << label << " cover diverges for " << workload << " n=" << n
                                      << " d=" << d << "\n";
                            return false;
                        }
                        return true;
                    };
                    if (run_naive && !check("naive", naive_cover)) return 3;
                    if (run_optimized && !check("optimized", optimized_cover)) return 3;
                }
            }
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridlight: a pushdown-optimizing query engine for gridded binary datasets"};
    app.require_subcommand(1);

    CliConfig cfg;
    app.add_option("-m,--manifest", cfg.manifest, "catalog manifest path")->envname("GRIDLIGHT_MANIFEST");
    app.add_option("--workers", cfg.workers, "scan worker threads (0 = cpu count)");
    app.add_option("--max-cells", cfg.max_cells, "maximum cells per subarray lookup")->check(CLI::PositiveNumber);
    app.add_option("--dnf-cap", cfg.dnf_cap, "maximum DNF clause count")->check(CLI::PositiveNumber);
    app.add_option("--format", cfg.format, "result format: csv or table")
        ->check(CLI::IsMember({"csv", "table"}));

    auto* reg = app.add_subcommand("register", "register a dataset in the manifest");
    std::string reg_name, reg_spanning, reg_tabular;
    char reg_delim = ',';
    std::vector<std::string> reg_files;
    reg->add_option("name", reg_name, "dataset name")->required();
    reg->add_option("files", reg_files, "files or globs")->required();
    reg->add_option("--spanning", reg_spanning, "comma-separated spanning dimensions");
    reg->add_option("--tabular", reg_tabular, "tabular column spec name:type,...");
    reg->add_option("--delimiter", reg_delim, "tabular field delimiter");

    auto* query = app.add_subcommand("query", "run a query (inline text or @file)");
    std::string query_text, query_envelope;
    bool query_explain = false, query_stats = false;
    query->add_option("text", query_text, "query text or @file")->required();
    query->add_flag("--explain", query_explain, "print the plan instead of executing");
    query->add_flag("--stats", query_stats, "print the stats trailer to stderr");
    query->add_option("--envelope", query_envelope, "compute envelopes first: dataset:dim1,dim2,...");

    auto* gen = app.add_subcommand("gen-fixture", "generate a synthetic gridded dataset");
    std::string gen_out, gen_dims, gen_vars = "sp:coord-sum", gen_fill = "coord-sum", gen_prefix = "fx";
    int gen_files = 1;
    gen->add_option("out_dir", gen_out, "output directory")->required();
    gen->add_option("--dims", gen_dims, "dimension spec name:length,...")->required();
    gen->add_option("--files", gen_files, "number of files")->check(CLI::PositiveNumber);
    gen->add_option("--vars", gen_vars, "variable spec name[:preset[:arg]],...");
    gen->add_option("--fill", gen_fill, "default fill preset")
        ->check(CLI::IsMember({"coord-sum", "constant", "sinusoidal"}));
    gen->add_option("--prefix", gen_prefix, "file name prefix");

    auto* bench = app.add_subcommand("bench-cover", "benchmark the disjoint cover strategies");
    std::string bench_workload, bench_n = "2,4,8,16", bench_d = "1,2", bench_strategy = "both";
    std::uint64_t bench_seed = 42;
    std::int64_t bench_cap = 10'000'000, bench_raster = std::int64_t{1} << 24;
    bench->add_option("--workload", bench_workload, "aligned, misaligned, diagonal or centered")->required();
    bench->add_option("--n", bench_n, "comma-separated block counts");
    bench->add_option("--d", bench_d, "comma-separated dimensionalities");
    bench->add_option("--strategy", bench_strategy, "both, naive or optimized")
        ->check(CLI::IsMember({"both", "naive", "optimized"}));
    bench->add_option("--seed", bench_seed, "workload seed");
    bench->add_option("--cap", bench_cap, "naive sub-block cap")->check(CLI::PositiveNumber);
    bench->add_option("--max-raster-cells", bench_raster, "domain limit for the equivalence check")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    if (reg->parsed()) return cmd_register(cfg, reg_name, reg_files, reg_spanning, reg_tabular, reg_delim);
    if (query->parsed()) return cmd_query(cfg, query_text, query_explain, query_stats, query_envelope);
    if (gen->parsed()) return cmd_gen_fixture(gen_out, gen_dims, gen_files, gen_vars, gen_fill, gen_prefix);
    if (bench->parsed())
        return cmd_bench_cover(bench_workload, bench_n, bench_d, bench_strategy, bench_seed, bench_cap,
                               bench_raster);
    return 0;
}
