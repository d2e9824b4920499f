#include "gridlight/engine.hpp"

#include "gridlight/textutil.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

namespace gridlight {

namespace detail {

int effective_workers(const EngineOptions& opts) {
    if (opts.workers > 0) return opts.workers;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 4 : static_cast<int>(hw);
}

/// Runs fn(0..n-1) on a bounded pool; rethrows the first failure.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    int pool = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (pool <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int t = 0; t < pool; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load(std::memory_order_relaxed)) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(error_mu);
                    if (!error) error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace detail

namespace {

bool eval_cmp(CmpOp op, double v, const std::vector<double>& vals) {
    switch (op) {
        case CmpOp::Lt: return v < vals[0];
        case CmpOp::Le: return v <= vals[0];
        case CmpOp::Gt: return v > vals[0];
        case CmpOp::Ge: return v >= vals[0];
        case CmpOp::Eq: return v == vals[0];
        case CmpOp::Ne: return v != vals[0];
        case CmpOp::In: return std::find(vals.begin(), vals.end(), v) != vals.end();
        case CmpOp::NotIn: return std::find(vals.begin(), vals.end(), v) == vals.end();
    }
    return false;
}

} // namespace

bool eval_pred_row(const BoundPred& p, const RowBatch& batch, std::size_t row) {
    switch (p.kind) {
        case BoundPred::Kind::Atom:
            return eval_cmp(p.atom.op, batch.at(p.atom.ref).num_at(row), p.atom.values);
        case BoundPred::Kind::Not: return !eval_pred_row(p.children[0], batch, row);
        case BoundPred::Kind::And:
            for (const auto& c : p.children)
                if (!eval_pred_row(c, batch, row)) return false;
            return true;
        case BoundPred::Kind::Or:
            for (const auto& c : p.children)
                if (eval_pred_row(c, batch, row)) return true;
            return false;
    }
    return false;
}

// --------------------------------------------------------------- expressions

namespace {

void eval_expr_rec(const BoundExpr& e, const RowBatch& batch, std::vector<double>& out) {
    const std::size_t n = batch.rows;
    switch (e.kind) {
        case BoundExpr::Kind::Column: {
            const Column& col = batch.at(e.ref);
            out.resize(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = col.num_at(i);
            return;
        }
        case BoundExpr::Kind::Number:
            out.assign(n, e.number);
            return;
        case BoundExpr::Kind::Binary: {
            std::vector<double> rhs;
            eval_expr_rec(*e.lhs, batch, out);
            eval_expr_rec(*e.rhs, batch, rhs);
            switch (e.bin_op) {
                case BinaryOp::Add:
                    for (std::size_t i = 0; i < n; ++i) out[i] += rhs[i];
                    break;
                case BinaryOp::Sub:
                    for (std::size_t i = 0; i < n; ++i) out[i] -= rhs[i];
                    break;
                case BinaryOp::Mul:
                    for (std::size_t i = 0; i < n; ++i) out[i] *= rhs[i];
                    break;
                case BinaryOp::Div:
                    for (std::size_t i = 0; i < n; ++i) out[i] /= rhs[i];
                    break;
            }
            return;
        }
        case BoundExpr::Kind::Unary: {
            eval_expr_rec(*e.arg, batch, out);
            switch (e.func) {
                case UnaryFunc::Neg:
                    for (std::size_t i = 0; i < n; ++i) out[i] = -out[i];
                    break;
                case UnaryFunc::Abs:
                    for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(out[i]);
                    break;
                case UnaryFunc::Exp:
                    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(out[i]);
                    break;
                case UnaryFunc::Sqrt:
                    for (std::size_t i = 0; i < n; ++i) {
                        if (out[i] < 0)
                            fail(Errc::DomainError, "sqrt of negative value " + format_number(out[i]) +
                                                        " at row " + std::to_string(i));
                        out[i] = std::sqrt(out[i]);
                    }
                    break;
                case UnaryFunc::Ln:
                    for (std::size_t i = 0; i < n; ++i) {
                        if (out[i] <= 0)
                            fail(Errc::DomainError, "ln of non-positive value " + format_number(out[i]) +
                                                        " at row " + std::to_string(i));
                        out[i] = std::log(out[i]);
                    }
                    break;
            }
            return;
        }
    }
}

} // namespace

Column evaluate_expression(const BoundExpr& expr, const RowBatch& batch) {
    Column col;
    col.type = ColumnType::Float64;
    eval_expr_rec(expr, batch, col.nums);
    return col;
}

// ----------------------------------------------------------------- aggregator

Aggregator::Aggregator(const std::vector<BoundSelectItem>& items) : items_(&items) {
    states_.resize(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].agg == AggKind::Histogram)
            states_[i].bins.assign(static_cast<std::size_t>(items[i].hist_bins), 0);
}

void Aggregator::fold(const RowBatch& batch) {
    for (std::size_t i = 0; i < items_->size(); ++i) {
        const BoundSelectItem& item = (*items_)[i];
        State& st = states_[i];
        if (item.agg == AggKind::Count) {
            // grid rows have no nulls, so count(expr) counts rows
            st.count += static_cast<std::int64_t>(batch.rows);
            continue;
        }
        Column col = evaluate_expression(*item.expr, batch);
        switch (item.agg) {
            case AggKind::Count: break;
            case AggKind::Min:
            case AggKind::Max:
                for (double v : col.nums) {
                    if (!st.seen) {
                        st.min = st.max = v;
                        st.seen = true;
                    } else {
                        st.min = std::min(st.min, v);
                        st.max = std::max(st.max, v);
                    }
                }
                st.count += static_cast<std::int64_t>(batch.rows);
                break;
            case AggKind::Mean:
                for (double v : col.nums) {
                    // Neumaier compensated summation
                    double t = st.sum + v;
                    if (std::fabs(st.sum) >= std::fabs(v))
                        st.comp += (st.sum - t) + v;
                    else
                        st.comp += (v - t) + st.sum;
                    st.sum = t;
                }
                st.count += static_cast<std::int64_t>(batch.rows);
                break;
            case AggKind::Histogram: {
                const double lo = item.hist_lo, hi = item.hist_hi;
                const double width = (hi - lo) / static_cast<double>(item.hist_bins);
                for (double v : col.nums) {
                    if (v < lo) {
                        ++st.underflow;
                    } else {
                        auto bin = static_cast<std::int64_t>(std::floor((v - lo) / width));
                        if (bin >= item.hist_bins)
                            ++st.overflow;
                        else
                            ++st.bins[static_cast<std::size_t>(bin)];
                    }
                }
                st.count += static_cast<std::int64_t>(batch.rows);
                break;
            }
            case AggKind::None: break;
        }
    }
}

void Aggregator::merge(const Aggregator& other) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        const State& o = other.states_[i];
        State& st = states_[i];
        st.count += o.count;
        if (o.seen) {
            if (!st.seen) {
                st.min = o.min;
                st.max = o.max;
                st.seen = true;
            } else {
                st.min = std::min(st.min, o.min);
                st.max = std::max(st.max, o.max);
            }
        }
        double t = st.sum + o.sum;
        if (std::fabs(st.sum) >= std::fabs(o.sum))
            st.comp += (st.sum - t) + o.sum;
        else
            st.comp += (o.sum - t) + st.sum;
        st.sum = t;
        st.comp += o.comp;
        for (std::size_t b = 0; b < st.bins.size(); ++b) st.bins[b] += o.bins[b];
        st.underflow += o.underflow;
        st.overflow += o.overflow;
    }
}

std::vector<OutputColumn> Aggregator::output_columns(const std::vector<BoundSelectItem>& items) {
    if (items.size() == 1 && items[0].agg == AggKind::Histogram) {
        return {{"bin", ColumnType::Int64},
                {"lo", ColumnType::Float64},
                {"hi", ColumnType::Float64},
                {items[0].name, ColumnType::Int64}};
    }
    std::vector<OutputColumn> out;
    for (const auto& item : items) {
        ColumnType type = ColumnType::Float64;
        if (item.agg == AggKind::Count) type = ColumnType::Int64;
        if ((item.agg == AggKind::Min || item.agg == AggKind::Max) && item.expr &&
            item.expr->kind == BoundExpr::Kind::Column && item.expr->col_type == ColumnType::Timestamp)
            type = ColumnType::Timestamp;
        out.push_back({item.name, type});
    }
    return out;
}

RowBatch Aggregator::result() const {
    RowBatch out;
    const auto& items = *items_;
    if (items.size() == 1 && items[0].agg == AggKind::Histogram) {
        const State& st = states_[0];
        const double lo = items[0].hist_lo, hi = items[0].hist_hi;
        const double width = (hi - lo) / static_cast<double>(items[0].hist_bins);
        Column bin{ColumnType::Int64, {}, {}, {}};
        Column blo{ColumnType::Float64, {}, {}, {}};
        Column bhi{ColumnType::Float64, {}, {}, {}};
        Column count{ColumnType::Int64, {}, {}, {}};
        auto add = [&](std::int64_t b, double l, double h, std::int64_t c) {
            bin.ints.push_back(b);
            blo.nums.push_back(l);
            bhi.nums.push_back(h);
            count.ints.push_back(c);
        };
        add(-1, -std::numeric_limits<double>::infinity(), lo, st.underflow);
        for (std::int64_t b = 0; b < items[0].hist_bins; ++b)
            add(b, lo + static_cast<double>(b) * width, lo + static_cast<double>(b + 1) * width,
                st.bins[static_cast<std::size_t>(b)]);
        add(items[0].hist_bins, hi, std::numeric_limits<double>::infinity(), st.overflow);
        out.rows = bin.ints.size();
        out.columns = {std::move(bin), std::move(blo), std::move(bhi), std::move(count)};
        out.left_width = out.columns.size();
        return out;
    }

    auto cols = output_columns(items);
    out.rows = 1;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const State& st = states_[i];
        Column col;
        col.type = cols[i].type;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        switch (items[i].agg) {
            case AggKind::Count: col.ints.push_back(st.count); break;
            case AggKind::Min: col.nums.push_back(st.seen ? st.min : nan); break;
            case AggKind::Max: col.nums.push_back(st.seen ? st.max : nan); break;
            case AggKind::Mean:
                col.nums.push_back(st.count > 0 ? (st.sum + st.comp) / static_cast<double>(st.count) : nan);
                break;
            default: break;
        }
        out.columns.push_back(std::move(col));
    }
    out.left_width = out.columns.size();
    return out;
}

// ------------------------------------------------------------------ grid scan

namespace {

struct GridFileResult {
    std::vector<RowBatch> batches;
    FileStats stats;
};

void check_file_schema(const GridFileHandle& handle, const ScanSpec& spec) {
    const FileSchema& hdr = handle.header();
    const auto& dims = spec.dims;
    if (hdr.dimensions.size() != dims.size())
        fail(Errc::SchemaMismatch, "'" + handle.path() + "' declares " + std::to_string(hdr.dimensions.size()) +
                                       " dimensions, expected " + std::to_string(dims.size()));
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (hdr.dimensions[k].name != dims[k].name)
            fail(Errc::SchemaMismatch, "'" + handle.path() + "' dimension " + std::to_string(k) + " is '" +
                                           hdr.dimensions[k].name + "', expected '" + dims[k].name + "'");
        if (!dims[k].spanning && handle.dim_length(static_cast<int>(k)) != dims[k].length)
            fail(Errc::SchemaMismatch, "'" + handle.path() + "' non-spanning dimension '" + dims[k].name +
                                           "' has length " + std::to_string(handle.dim_length(static_cast<int>(k))) +
                                           ", expected " + std::to_string(dims[k].length));
    }
    for (int vi : spec.projected_vars) {
        const std::string& var = spec.dataset.schema.variables[static_cast<std::size_t>(vi)];
        if (hdr.find_var(var) < 0)
            fail(Errc::SchemaMismatch, "'" + handle.path() + "' is missing variable '" + var + "'");
    }
}

CoordinateAxis read_decoded_axis(const GridFileHandle& handle, const DimInfo& dim) {
    CoordinateAxis axis = handle.read_axis(dim.name);
    if (dim.time_units)
        for (double& v : axis.values) v = decode_time(v, *dim.time_units);
    return axis;
}

GridFileResult scan_grid_file(const ScanSpec& spec, std::size_t file_index, const EngineOptions& opts) {
    GridFileResult result;
    const std::string& path = spec.dataset.files[file_index];
    result.stats.dataset = spec.dataset.name;
    result.stats.file = path;

    const LocalPlan& local = spec.locals[file_index];
    if (local.blocks.empty()) {
        result.stats.skipped = true;
        return result;
    }

    GridFileHandle handle = open_grid_file(path);
    check_file_schema(handle, spec);

    const RowSchema& rs = spec.dataset.row_schema;
    const auto& dims = spec.dataset.schema.dims;
    const std::size_t ndims = dims.size();
    std::string file_label = std::filesystem::path(path).filename().string();

    std::vector<CoordinateAxis> axes(ndims);
    for (std::size_t k = 0; k < ndims; ++k) axes[k] = read_decoded_axis(handle, dims[k]);

    // residual atoms reference variable columns; map row-schema column -> projected slot
    std::vector<int> var_slot(rs.columns.size(), -1);
    for (std::size_t slot = 0; slot < spec.projected_vars.size(); ++slot) {
        const std::string& var = spec.dataset.schema.variables[static_cast<std::size_t>(spec.projected_vars[slot])];
        var_slot[static_cast<std::size_t>(rs.find(var))] = static_cast<int>(slot);
    }

    IoCounter io;
    const std::string fastest = dims.empty() ? std::string() : dims.back().name;

    for (const Block& whole : local.blocks) {
        for (const Block& piece : split_for_memory(whole, opts.max_cells, fastest)) {
            std::vector<NdArray> loaded(spec.projected_vars.size());
            for (std::size_t slot = 0; slot < spec.projected_vars.size(); ++slot) {
                const std::string& var =
                    spec.dataset.schema.variables[static_cast<std::size_t>(spec.projected_vars[slot])];
                loaded[slot] = handle.read_subarray(var, piece, &io);
            }
            ++result.stats.blocks;

            const auto cells = static_cast<std::size_t>(piece.cells());
            std::vector<char> keep(cells, 1);
            std::size_t kept = cells;
            std::vector<std::int64_t> pos(piece.start.begin(), piece.start.end());
            if (local.needs_row_filter) {
                kept = 0;
                for (std::size_t cell = 0; cell < cells; ++cell) {
                    bool pass = false;
                    for (const ClauseFilter& clause : local.clauses) {
                        bool contained = true;
                        for (std::size_t k = 0; k < ndims && contained; ++k)
                            contained = clause.intervals[k].lo <= pos[k] && pos[k] <= clause.intervals[k].hi;
                        if (!contained) continue;
                        bool residual_ok = true;
                        for (const BoundAtom& atom : clause.residuals) {
                            int slot = var_slot[static_cast<std::size_t>(atom.ref.column)];
                            double v = loaded[static_cast<std::size_t>(slot)].elements[cell];
                            if (!eval_cmp(atom.op, v, atom.values)) {
                                residual_ok = false;
                                break;
                            }
                        }
                        if (residual_ok) {
                            pass = true;
                            break;
                        }
                    }
                    keep[cell] = pass;
                    kept += pass;

                    for (std::size_t k = ndims; k-- > 0;) {
                        if (++pos[k] <= piece.end[k]) break;
                        pos[k] = piece.start[k];
                    }
                }
            }
            if (kept == 0) continue;

            RowBatch batch;
            batch.rows = kept;
            batch.columns.resize(rs.columns.size());
            batch.left_width = rs.columns.size();
            for (std::size_t c = 0; c < rs.columns.size(); ++c) {
                Column& col = batch.columns[c];
                col.type = rs.columns[c].type;
                const RowColumn& rc = rs.columns[c];
                if (rc.role == ColumnRole::Variable && var_slot[c] < 0) continue; // not projected
                switch (rc.type) {
                    case ColumnType::Text: col.texts.reserve(kept); break;
                    case ColumnType::Int64: col.ints.reserve(kept); break;
                    default: col.nums.reserve(kept);
                }
            }

            pos.assign(piece.start.begin(), piece.start.end());
            for (std::size_t cell = 0; cell < cells; ++cell) {
                if (keep[cell]) {
                    for (std::size_t c = 0; c < rs.columns.size(); ++c) {
                        const RowColumn& rc = rs.columns[c];
                        Column& col = batch.columns[c];
                        switch (rc.role) {
                            case ColumnRole::File: col.texts.push_back(file_label); break;
                            case ColumnRole::SpanningDim:
                            case ColumnRole::Dim:
                                col.nums.push_back(
                                    axes[static_cast<std::size_t>(rc.dim_index)]
                                        .values[static_cast<std::size_t>(pos[static_cast<std::size_t>(rc.dim_index)])]);
                                break;
                            case ColumnRole::DimPosition:
                                col.ints.push_back(pos[static_cast<std::size_t>(rc.dim_index)]);
                                break;
                            case ColumnRole::Variable:
                                if (var_slot[c] >= 0)
                                    col.nums.push_back(loaded[static_cast<std::size_t>(var_slot[c])].elements[cell]);
                                break;
                            case ColumnRole::TabularField: break;
                        }
                    }
                }
                for (std::size_t k = ndims; k-- > 0;) {
                    if (++pos[k] <= piece.end[k]) break;
                    pos[k] = piece.start[k];
                }
            }
            result.stats.rows += static_cast<std::int64_t>(kept);
            result.batches.push_back(std::move(batch));
        }
    }
    result.stats.bytes = io.bytes.load();
    return result;
}

} // namespace

// --------------------------------------------------------------- tabular scan

namespace detail {

namespace {

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

} // namespace

RowBatch read_tabular_file(const DatasetDescriptor& ds, const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoFailure, "cannot open '" + path + "'");

    const auto& cols = ds.columns;
    RowBatch batch;
    batch.columns.resize(cols.size());
    batch.left_width = cols.size();
    for (std::size_t c = 0; c < cols.size(); ++c) batch.columns[c].type = cols[c].type;

    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line, ds.delimiter);
        if (first) {
            first = false;
            bool header = fields.size() == cols.size();
            for (std::size_t c = 0; header && c < cols.size(); ++c) header = fields[c] == cols[c].name;
            if (header) continue;
        }
        if (fields.size() != cols.size())
            fail(Errc::ArityMismatch, path + ":" + std::to_string(lineno) + ": " + std::to_string(fields.size()) +
                                          " fields for " + std::to_string(cols.size()) + " columns");
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::string& f = fields[c];
            Column& col = batch.columns[c];
            switch (cols[c].type) {
                case ColumnType::Float64: {
                    char* endp = nullptr;
                    double v = std::strtod(f.c_str(), &endp);
                    if (endp != f.c_str() + f.size() || f.empty())
                        fail(Errc::ParseFailure, path + ":" + std::to_string(lineno) + ": '" + f + "' is not a number");
                    col.nums.push_back(v);
                    break;
                }
                case ColumnType::Int64: {
                    char* endp = nullptr;
                    long long v = std::strtoll(f.c_str(), &endp, 10);
                    if (endp != f.c_str() + f.size() || f.empty())
                        fail(Errc::ParseFailure, path + ":" + std::to_string(lineno) + ": '" + f + "' is not an integer");
                    col.ints.push_back(v);
                    break;
                }
                case ColumnType::Timestamp: {
                    auto ts = parse_timestamp(f);
                    if (!ts)
                        fail(Errc::ParseFailure, path + ":" + std::to_string(lineno) + ": '" + f + "' is not a timestamp");
                    col.nums.push_back(static_cast<double>(*ts));
                    break;
                }
                case ColumnType::Text: col.texts.push_back(f); break;
            }
        }
        ++batch.rows;
    }
    return batch;
}

} // namespace detail

namespace {

GridFileResult scan_tabular_file(const ScanSpec& spec, std::size_t file_index) {
    GridFileResult result;
    const std::string& path = spec.dataset.files[file_index];
    result.stats.dataset = spec.dataset.name;
    result.stats.file = path;

    RowBatch batch = detail::read_tabular_file(spec.dataset, path);

    if (spec.predicate && batch.rows > 0) {
        RowBatch filtered;
        filtered.columns.resize(batch.columns.size());
        filtered.left_width = batch.left_width;
        for (std::size_t c = 0; c < batch.columns.size(); ++c) filtered.columns[c].type = batch.columns[c].type;
        for (std::size_t r = 0; r < batch.rows; ++r) {
            if (!eval_pred_row(*spec.predicate, batch, r)) continue;
            for (std::size_t c = 0; c < batch.columns.size(); ++c) {
                const Column& src = batch.columns[c];
                Column& dst = filtered.columns[c];
                switch (src.type) {
                    case ColumnType::Int64: dst.ints.push_back(src.ints[r]); break;
                    case ColumnType::Text: dst.texts.push_back(src.texts[r]); break;
                    default: dst.nums.push_back(src.nums[r]);
                }
            }
            ++filtered.rows;
        }
        batch = std::move(filtered);
    }

    result.stats.rows = static_cast<std::int64_t>(batch.rows);
    if (batch.rows > 0) result.batches.push_back(std::move(batch));
    return result;
}

} // namespace

std::vector<RowBatch> execute_scan(const ScanSpec& spec, const EngineOptions& opts, QueryStats& stats) {
    const std::size_t nfiles = spec.dataset.files.size();
    std::vector<GridFileResult> results(nfiles);

    if (spec.dataset.kind == DatasetKind::Grid) {
        detail::parallel_for(nfiles, detail::effective_workers(opts),
                             [&](std::size_t i) { results[i] = scan_grid_file(spec, i, opts); });
    } else {
        detail::parallel_for(nfiles, detail::effective_workers(opts),
                             [&](std::size_t i) { results[i] = scan_tabular_file(spec, i); });
    }

    std::vector<RowBatch> batches;
    for (std::size_t i = 0; i < nfiles; ++i) {
        GridFileResult& r = results[i];
        if (r.stats.skipped)
            ++stats.files_skipped;
        else
            ++stats.files_scanned;
        stats.blocks_loaded += r.stats.blocks;
        stats.bytes_read += r.stats.bytes;
        stats.bytes_by_dataset[spec.dataset.name] += r.stats.bytes;
        stats.per_file.push_back(r.stats);
        for (auto& b : r.batches) batches.push_back(std::move(b));
    }
    return batches;
}

std::string QueryStats::trailer() const {
    std::string out;
    out += "bytes_read=" + std::to_string(bytes_read) + "\n";
    out += "files_scanned=" + std::to_string(files_scanned) + "\n";
    out += "files_skipped=" + std::to_string(files_skipped) + "\n";
    out += "blocks_loaded=" + std::to_string(blocks_loaded) + "\n";
    out += "rows_emitted=" + std::to_string(rows_emitted) + "\n";
    out += "wall_ms=" + format_number(wall_ms) + "\n";
    return out;
}

} // namespace gridlight
