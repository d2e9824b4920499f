#pragma once

// Brute-force query evaluator used as an oracle. It materializes every row
// of a dataset through full-variable reads and evaluates the query AST
// directly, row by row. It shares only the storage layer and the parser with
// the engine; none of the rewriting, cover, pruning or join machinery.

#include "gridlight/catalog.hpp"
#include "gridlight/engine.hpp"
#include "gridlight/gridfile.hpp"
#include "gridlight/queryir.hpp"
#include "gridlight/textutil.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace gridlight::testing {

using Cell = std::variant<double, std::int64_t, std::string>;

struct OracleTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    int find(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline double cell_num(const Cell& c) {
    if (std::holds_alternative<double>(c)) return std::get<double>(c);
    if (std::holds_alternative<std::int64_t>(c)) return static_cast<double>(std::get<std::int64_t>(c));
    throw std::runtime_error("oracle: text cell used as a number");
}

inline OracleTable materialize_grid(const DatasetDescriptor& ds) {
    OracleTable table;
    for (const auto& c : ds.row_schema.columns) table.columns.push_back(c.name);

    for (const std::string& path : ds.files) {
        GridFileHandle h = open_grid_file(path);
        const auto& dims = ds.schema.dims;
        std::vector<CoordinateAxis> axes(dims.size());
        std::vector<std::int64_t> lens(dims.size());
        for (std::size_t k = 0; k < dims.size(); ++k) {
            axes[k] = h.read_axis(dims[k].name);
            if (dims[k].time_units)
                for (double& v : axes[k].values) v = decode_time(v, *dims[k].time_units);
            lens[k] = static_cast<std::int64_t>(axes[k].values.size());
        }
        std::vector<NdArray> vars(ds.schema.variables.size());
        for (std::size_t v = 0; v < vars.size(); ++v) {
            std::vector<std::string> names;
            std::vector<std::int64_t> start(dims.size(), 0), end;
            for (std::size_t k = 0; k < dims.size(); ++k) {
                names.push_back(dims[k].name);
                end.push_back(lens[k] - 1);
            }
            vars[v] = h.read_subarray(ds.schema.variables[v], Block(names, start, end));
        }

        std::string label = std::filesystem::path(path).filename().string();
        std::vector<std::int64_t> pos(dims.size(), 0);
        std::size_t cell_index = 0;
        for (;;) {
            std::vector<Cell> row;
            row.reserve(table.columns.size());
            for (const auto& col : ds.row_schema.columns) {
                switch (col.role) {
                    case ColumnRole::File: row.emplace_back(label); break;
                    case ColumnRole::SpanningDim:
                    case ColumnRole::Dim:
                        row.emplace_back(
                            axes[static_cast<std::size_t>(col.dim_index)]
                                .values[static_cast<std::size_t>(pos[static_cast<std::size_t>(col.dim_index)])]);
                        break;
                    case ColumnRole::DimPosition:
                        row.emplace_back(pos[static_cast<std::size_t>(col.dim_index)]);
                        break;
                    case ColumnRole::Variable:
                        row.emplace_back(vars[static_cast<std::size_t>(col.var_index)].elements[cell_index]);
                        break;
                    case ColumnRole::TabularField: break;
                }
            }
            table.rows.push_back(std::move(row));
            ++cell_index;
            bool done = true;
            for (std::size_t k = dims.size(); k-- > 0;) {
                if (++pos[k] < lens[k]) {
                    done = false;
                    break;
                }
                pos[k] = 0;
            }
            if (done || dims.empty()) break;
        }
    }
    return table;
}

inline OracleTable materialize_tabular(const DatasetDescriptor& ds) {
    OracleTable table;
    for (const auto& c : ds.columns) table.columns.push_back(c.name);
    for (const std::string& path : ds.files) {
        std::ifstream in(path);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::vector<std::string> fields;
            std::size_t start = 0;
            for (std::size_t i = 0; i <= line.size(); ++i)
                if (i == line.size() || line[i] == ds.delimiter) {
                    fields.push_back(line.substr(start, i - start));
                    start = i + 1;
                }
            if (first) {
                first = false;
                bool header = fields.size() == ds.columns.size();
                for (std::size_t c = 0; header && c < ds.columns.size(); ++c)
                    header = fields[c] == ds.columns[c].name;
                if (header) continue;
            }
            std::vector<Cell> row;
            for (std::size_t c = 0; c < ds.columns.size(); ++c) {
                switch (ds.columns[c].type) {
                    case ColumnType::Float64: row.emplace_back(std::stod(fields[c])); break;
                    case ColumnType::Int64: row.emplace_back(static_cast<std::int64_t>(std::stoll(fields[c]))); break;
                    case ColumnType::Timestamp: row.emplace_back(static_cast<double>(*parse_timestamp(fields[c]))); break;
                    case ColumnType::Text: row.emplace_back(fields[c]); break;
                }
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

inline OracleTable materialize(const DatasetDescriptor& ds) {
    return ds.kind == DatasetKind::Grid ? materialize_grid(ds) : materialize_tabular(ds);
}

// ---- row-wise AST evaluation

struct OracleRow {
    const OracleTable* left;
    const std::vector<Cell>* lrow;
    const OracleTable* right = nullptr;
    const std::vector<Cell>* rrow = nullptr;
    const std::string* left_name = nullptr;
    const std::string* right_name = nullptr;

    const Cell& lookup(const std::string& name) const {
        std::string ds, col = name;
        if (auto dot = name.find('.'); dot != std::string::npos) {
            ds = name.substr(0, dot);
            col = name.substr(dot + 1);
        }
        if (ds.empty() || (left_name && ds == *left_name)) {
            int i = left->find(col);
            if (i >= 0) return (*lrow)[static_cast<std::size_t>(i)];
        }
        if (right && (ds.empty() || (right_name && ds == *right_name))) {
            int i = right->find(col);
            if (i >= 0) return (*rrow)[static_cast<std::size_t>(i)];
        }
        throw std::runtime_error("oracle: no column " + name);
    }
};

inline double oracle_literal(const Literal& lit) {
    if (!lit.is_text) return lit.number;
    auto ts = parse_timestamp(lit.text);
    if (!ts) throw std::runtime_error("oracle: bad timestamp literal");
    return static_cast<double>(*ts);
}

inline double oracle_eval_expr(const Expr& e, const OracleRow& row) {
    switch (e.kind) {
        case Expr::Kind::Column: return cell_num(row.lookup(e.column));
        case Expr::Kind::Number: return e.number;
        case Expr::Kind::String: return oracle_literal(Literal{true, 0.0, e.text});
        case Expr::Kind::Binary: {
            double a = oracle_eval_expr(*e.lhs, row), b = oracle_eval_expr(*e.rhs, row);
            switch (e.bin_op) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div: return a / b;
            }
            return 0;
        }
        case Expr::Kind::Unary: {
            double a = oracle_eval_expr(*e.arg, row);
            switch (e.func) {
                case UnaryFunc::Neg: return -a;
                case UnaryFunc::Abs: return std::fabs(a);
                case UnaryFunc::Exp: return std::exp(a);
                case UnaryFunc::Sqrt: return std::sqrt(a);
                case UnaryFunc::Ln: return std::log(a);
            }
            return 0;
        }
    }
    return 0;
}

inline bool oracle_eval_pred(const Pred& p, const OracleRow& row) {
    switch (p.kind) {
        case Pred::Kind::Atom: {
            double v = cell_num(row.lookup(p.atom.column));
            auto cmp = [&](double x) {
                switch (p.atom.op) {
                    case CmpOp::Lt: return v < x;
                    case CmpOp::Le: return v <= x;
                    case CmpOp::Gt: return v > x;
                    case CmpOp::Ge: return v >= x;
                    case CmpOp::Eq: return v == x;
                    case CmpOp::Ne: return v != x;
                    default: return false;
                }
            };
            if (p.atom.op == CmpOp::In || p.atom.op == CmpOp::NotIn) {
                bool found = false;
                for (const Literal& lit : p.atom.values)
                    if (v == oracle_literal(lit)) {
                        found = true;
                        break;
                    }
                return p.atom.op == CmpOp::In ? found : !found;
            }
            return cmp(oracle_literal(p.atom.values.at(0)));
        }
        case Pred::Kind::Not: return !oracle_eval_pred(p.children[0], row);
        case Pred::Kind::And:
            for (const auto& c : p.children)
                if (!oracle_eval_pred(c, row)) return false;
            return true;
        case Pred::Kind::Or:
            for (const auto& c : p.children)
                if (oracle_eval_pred(c, row)) return true;
            return false;
    }
    return false;
}

// Full evaluation of a query against materialized tables. Output cells are
// formatted text, one vector per row.
inline std::vector<std::vector<std::string>> oracle_run(const QueryAst& ast, const Catalog& catalog) {
    DatasetDescriptor from = catalog.get(ast.from);
    OracleTable left = materialize(from);

    std::vector<OracleRow> rows;
    OracleTable right;
    DatasetDescriptor right_ds;
    if (ast.join) {
        right_ds = catalog.get(ast.join->dataset);
        right = materialize(right_ds);
        for (const auto& lrow : left.rows) {
            for (const auto& rrow : right.rows) {
                bool match = true;
                for (const auto& [a, b] : ast.join->keys) {
                    OracleRow probe{&left, &lrow, &right, &rrow, &from.name, &right_ds.name};
                    if (cell_num(probe.lookup(a)) != cell_num(probe.lookup(b))) {
                        match = false;
                        break;
                    }
                }
                if (match) rows.push_back({&left, &lrow, &right, &rrow, &from.name, &right_ds.name});
            }
        }
    } else {
        for (const auto& lrow : left.rows) rows.push_back({&left, &lrow, nullptr, nullptr, &from.name, nullptr});
    }

    std::vector<OracleRow> kept;
    for (const OracleRow& row : rows)
        if (!ast.where || oracle_eval_pred(*ast.where, row)) kept.push_back(row);

    // is a bare column reference a timestamp column? (drives formatting)
    auto is_timestamp_column = [&](const Expr& e) {
        if (e.kind != Expr::Kind::Column) return false;
        std::string col = e.column;
        if (auto dot = col.find('.'); dot != std::string::npos) col = col.substr(dot + 1);
        for (const DatasetDescriptor* ds : {&from, ast.join ? &right_ds : nullptr}) {
            if (!ds) continue;
            int i = ds->row_schema.find(col);
            if (i >= 0 && ds->row_schema.columns[static_cast<std::size_t>(i)].type == ColumnType::Timestamp)
                return true;
        }
        return false;
    };

    std::vector<std::vector<std::string>> out;
    bool aggregate = !ast.select.empty() && ast.select[0].agg != AggKind::None;
    if (!aggregate) {
        for (const OracleRow& row : kept) {
            std::vector<std::string> cells;
            for (const SelectItem& item : ast.select) {
                if (item.expr->kind == Expr::Kind::Column) {
                    const Cell& c = row.lookup(item.expr->column);
                    if (std::holds_alternative<std::string>(c)) {
                        cells.push_back(std::get<std::string>(c));
                        continue;
                    }
                    if (std::holds_alternative<std::int64_t>(c)) {
                        cells.push_back(format_int(std::get<std::int64_t>(c)));
                        continue;
                    }
                    if (is_timestamp_column(*item.expr)) {
                        cells.push_back(format_timestamp(static_cast<std::int64_t>(std::get<double>(c))));
                        continue;
                    }
                }
                cells.push_back(format_number(oracle_eval_expr(*item.expr, row)));
            }
            out.push_back(std::move(cells));
        }
        return out;
    }

    if (ast.select.size() == 1 && ast.select[0].agg == AggKind::Histogram) {
        const SelectItem& item = ast.select[0];
        double lo = item.hist_lo, hi = item.hist_hi;
        double width = (hi - lo) / static_cast<double>(item.hist_bins);
        std::vector<std::int64_t> bins(static_cast<std::size_t>(item.hist_bins), 0);
        std::int64_t under = 0, over = 0;
        for (const OracleRow& row : kept) {
            double v = oracle_eval_expr(*item.expr, row);
            if (v < lo) {
                ++under;
            } else {
                auto b = static_cast<std::int64_t>(std::floor((v - lo) / width));
                if (b >= item.hist_bins) ++over;
                else ++bins[static_cast<std::size_t>(b)];
            }
        }
        out.push_back({format_int(-1), "-inf", format_number(lo), format_int(under)});
        for (std::int64_t b = 0; b < item.hist_bins; ++b)
            out.push_back({format_int(b), format_number(lo + double(b) * width),
                           format_number(lo + double(b + 1) * width),
                           format_int(bins[static_cast<std::size_t>(b)])});
        out.push_back({format_int(item.hist_bins), format_number(hi), "inf", format_int(over)});
        return out;
    }

    std::vector<std::string> cells;
    for (const SelectItem& item : ast.select) {
        if (item.agg == AggKind::Count) {
            cells.push_back(format_int(static_cast<std::int64_t>(kept.size())));
            continue;
        }
        if (kept.empty()) {
            cells.push_back("nan");
            continue;
        }
        long double sum = 0;
        double mn = 0, mx = 0;
        bool first = true;
        for (const OracleRow& row : kept) {
            double v = oracle_eval_expr(*item.expr, row);
            sum += v;
            if (first) {
                mn = mx = v;
                first = false;
            } else {
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
        }
        bool as_timestamp =
            (item.agg == AggKind::Min || item.agg == AggKind::Max) && is_timestamp_column(*item.expr);
        auto fmt = [&](double v) {
            return as_timestamp ? format_timestamp(static_cast<std::int64_t>(v)) : format_number(v);
        };
        switch (item.agg) {
            case AggKind::Min: cells.push_back(fmt(mn)); break;
            case AggKind::Max: cells.push_back(fmt(mx)); break;
            case AggKind::Mean: cells.push_back(format_number(static_cast<double>(sum / kept.size()))); break;
            default: break;
        }
    }
    out.push_back(std::move(cells));
    return out;
}

// ---- comparison helpers

/// Engine results rendered the same way the CLI renders them.
inline std::vector<std::vector<std::string>> result_to_text(const QueryResult& result) {
    std::vector<std::vector<std::string>> out;
    for (const RowBatch& b : result.batches) {
        for (std::size_t r = 0; r < b.rows; ++r) {
            std::vector<std::string> row;
            row.reserve(result.columns.size());
            for (std::size_t c = 0; c < result.columns.size(); ++c) {
                const Column& col = b.columns[c];
                switch (col.type) {
                    case ColumnType::Text: row.push_back(col.texts[r]); break;
                    case ColumnType::Int64: row.push_back(format_int(col.ints[r])); break;
                    case ColumnType::Timestamp:
                        row.push_back(std::isnan(col.nums[r])
                                          ? "nan"
                                          : format_timestamp(static_cast<std::int64_t>(col.nums[r])));
                        break;
                    default: row.push_back(format_number(col.nums[r]));
                }
            }
            out.push_back(std::move(row));
        }
    }
    return out;
}

inline bool cells_equal(const std::string& a, const std::string& b, double rel_tol) {
    if (a == b) return true;
    char* enda = nullptr;
    char* endb = nullptr;
    double da = std::strtod(a.c_str(), &enda);
    double db = std::strtod(b.c_str(), &endb);
    if (enda != a.c_str() + a.size() || endb != b.c_str() + b.size()) return false;
    if (std::isnan(da) && std::isnan(db)) return true;
    double scale = std::max({1.0, std::fabs(da), std::fabs(db)});
    return std::fabs(da - db) <= rel_tol * scale;
}

inline bool row_sets_equal(std::vector<std::vector<std::string>> a, std::vector<std::vector<std::string>> b,
                           double rel_tol, std::string* diag = nullptr) {
    if (a.size() != b.size()) {
        if (diag) *diag = "row counts differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size());
        return false;
    }
    auto key = [](const std::vector<std::string>& row) {
        std::string k;
        for (const auto& c : row) {
            k += c;
            k += '\x1f';
        }
        return k;
    };
    std::sort(a.begin(), a.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
    std::sort(b.begin(), b.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) {
            if (diag) *diag = "row " + std::to_string(i) + " widths differ";
            return false;
        }
        for (std::size_t c = 0; c < a[i].size(); ++c) {
            if (!cells_equal(a[i][c], b[i][c], rel_tol)) {
                if (diag)
                    *diag = "row " + std::to_string(i) + " column " + std::to_string(c) + ": '" + a[i][c] +
                            "' vs '" + b[i][c] + "'";
                return false;
            }
        }
    }
    return true;
}

} // namespace gridlight::testing
