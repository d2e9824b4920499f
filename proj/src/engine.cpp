#include "gridlight/engine.hpp"

#include "gridlight/textutil.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_map>

namespace gridlight {

std::int64_t QueryResult::row_count() const {
    std::int64_t n = 0;
    for (const auto& b : batches) n += static_cast<std::int64_t>(b.rows);
    return n;
}

// -------------------------------------------------------------------- helpers

namespace {

void collect_sides(const BoundPred& p, std::set<int>& sides) {
    if (p.kind == BoundPred::Kind::Atom) {
        sides.insert(p.atom.ref.side);
        return;
    }
    for (const auto& c : p.children) collect_sides(c, sides);
}

void flatten_conjuncts(const BoundPred& p, std::vector<BoundPred>& out) {
    if (p.kind == BoundPred::Kind::And) {
        for (const auto& c : p.children) flatten_conjuncts(c, out);
        return;
    }
    out.push_back(p);
}

BoundPred remap_to_side0(BoundPred p) {
    if (p.kind == BoundPred::Kind::Atom) {
        p.atom.ref.side = 0;
        return p;
    }
    for (auto& c : p.children) c = remap_to_side0(std::move(c));
    return p;
}

std::optional<BoundPred> conjoin(std::vector<BoundPred> parts) {
    if (parts.empty()) return std::nullopt;
    if (parts.size() == 1) return std::move(parts[0]);
    BoundPred p;
    p.kind = BoundPred::Kind::And;
    p.children = std::move(parts);
    return p;
}

void collect_var_columns(const BoundExpr& e, int side, std::set<int>& cols) {
    switch (e.kind) {
        case BoundExpr::Kind::Column:
            if (e.ref.side == side) cols.insert(e.ref.column);
            break;
        case BoundExpr::Kind::Binary:
            collect_var_columns(*e.lhs, side, cols);
            collect_var_columns(*e.rhs, side, cols);
            break;
        case BoundExpr::Kind::Unary: collect_var_columns(*e.arg, side, cols); break;
        case BoundExpr::Kind::Number: break;
    }
}

void collect_pred_columns(const BoundPred& p, int side, std::set<int>& cols) {
    if (p.kind == BoundPred::Kind::Atom) {
        if (p.atom.ref.side == side) cols.insert(p.atom.ref.column);
        return;
    }
    for (const auto& c : p.children) collect_pred_columns(c, side, cols);
}

std::string print_bound_pred(const BoundPred& p, int parent_level = 0) {
    int level;
    switch (p.kind) {
        case BoundPred::Kind::Or: level = 1; break;
        case BoundPred::Kind::And: level = 2; break;
        case BoundPred::Kind::Not: level = 3; break;
        default: level = 4;
    }
    std::string out;
    switch (p.kind) {
        case BoundPred::Kind::Atom: out = print_bound_atom(p.atom); break;
        case BoundPred::Kind::Not: out = "NOT " + print_bound_pred(p.children[0], 4); break;
        case BoundPred::Kind::And:
        case BoundPred::Kind::Or: {
            const char* sep = p.kind == BoundPred::Kind::And ? " AND " : " OR ";
            for (std::size_t i = 0; i < p.children.size(); ++i) {
                if (i > 0) out += sep;
                out += print_bound_pred(p.children[i], level);
            }
            break;
        }
    }
    if (level < parent_level) out = "(" + out + ")";
    return out;
}

void append_value(Column& dst, const Column& src, std::size_t row) {
    switch (src.type) {
        case ColumnType::Int64: dst.ints.push_back(src.ints[row]); break;
        case ColumnType::Text: dst.texts.push_back(src.texts[row]); break;
        default: dst.nums.push_back(src.nums[row]);
    }
}

RowBatch filter_batch(const RowBatch& batch, const BoundPred& pred) {
    RowBatch out;
    out.columns.resize(batch.columns.size());
    out.left_width = batch.left_width;
    for (std::size_t c = 0; c < batch.columns.size(); ++c) out.columns[c].type = batch.columns[c].type;
    for (std::size_t r = 0; r < batch.rows; ++r) {
        if (!eval_pred_row(pred, batch, r)) continue;
        for (std::size_t c = 0; c < batch.columns.size(); ++c) {
            if (batch.columns[c].size() == 0) continue; // unprojected variable column
            append_value(out.columns[c], batch.columns[c], r);
        }
        ++out.rows;
    }
    return out;
}

} // namespace

// ------------------------------------------------------------------ envelopes

EnvelopeSet compute_envelopes(const DatasetDescriptor& dataset, const std::vector<std::string>& dims) {
    EnvelopeSet env;
    env.dims = dims;

    if (dataset.kind == DatasetKind::Grid) {
        for (const std::string& dim : dims)
            if (dataset.schema.find_dim(dim) < 0)
                fail(Errc::UnknownColumn, "no dimension '" + dim + "' in dataset '" + dataset.name + "'");
        for (const std::string& file : dataset.files) {
            GridFileHandle handle = open_grid_file(file);
            std::vector<std::pair<double, double>> bounds;
            bounds.reserve(dims.size());
            for (const std::string& dim : dims) {
                const DimInfo& info =
                    dataset.schema.dims[static_cast<std::size_t>(dataset.schema.find_dim(dim))];
                CoordinateAxis axis = handle.read_axis(dim);
                if (info.time_units)
                    for (double& v : axis.values) v = decode_time(v, *info.time_units);
                bounds.emplace_back(std::min(axis.values.front(), axis.values.back()),
                                    std::max(axis.values.front(), axis.values.back()));
            }
            env.per_file[file] = std::move(bounds);
        }
        return env;
    }

    std::vector<int> field(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
        int idx = dataset.row_schema.find(dims[k]);
        if (idx < 0) fail(Errc::UnknownColumn, "no column '" + dims[k] + "' in dataset '" + dataset.name + "'");
        if (dataset.row_schema.columns[static_cast<std::size_t>(idx)].type == ColumnType::Text)
            fail(Errc::TypeMismatch, "text column '" + dims[k] + "' cannot be enveloped");
        field[k] = idx;
    }
    for (const std::string& file : dataset.files) {
        RowBatch batch = detail::read_tabular_file(dataset, file);
        if (batch.rows == 0) continue;
        std::vector<std::pair<double, double>> bounds;
        bounds.reserve(dims.size());
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const Column& col = batch.columns[static_cast<std::size_t>(field[k])];
            double lo = col.num_at(0), hi = col.num_at(0);
            for (std::size_t r = 1; r < batch.rows; ++r) {
                lo = std::min(lo, col.num_at(r));
                hi = std::max(hi, col.num_at(r));
            }
            bounds.emplace_back(lo, hi);
        }
        env.per_file[file] = std::move(bounds);
    }
    return env;
}

std::optional<BoundPred> envelope_injection_predicate(const DatasetDescriptor& left,
                                                      const DatasetDescriptor& right,
                                                      const std::vector<std::pair<ColumnRef, ColumnRef>>& keys,
                                                      bool for_left_side) {
    if (!left.envelopes)
        fail(Errc::EnvelopeMissing, "dataset '" + left.name + "' has no envelopes");
    const EnvelopeSet& env = *left.envelopes;

    // join keys covered by the envelope, with the target-side column to constrain
    struct KeySlot {
        std::size_t env_dim;
        int target_column;
    };
    std::vector<KeySlot> slots;
    for (const auto& [lref, rref] : keys) {
        const RowColumn& lcol = left.row_schema.columns[static_cast<std::size_t>(lref.column)];
        auto it = std::find(env.dims.begin(), env.dims.end(), lcol.name);
        if (it == env.dims.end()) continue;
        slots.push_back({static_cast<std::size_t>(it - env.dims.begin()),
                         for_left_side ? lref.column : rref.column});
    }
    if (slots.empty()) return std::nullopt;

    const DatasetDescriptor& target = for_left_side ? left : right;
    BoundPred disjunction;
    disjunction.kind = BoundPred::Kind::Or;
    for (const auto& [file, bounds] : env.per_file) {
        BoundPred conj;
        conj.kind = BoundPred::Kind::And;
        for (const KeySlot& slot : slots) {
            const RowColumn& col = target.row_schema.columns[static_cast<std::size_t>(slot.target_column)];
            BoundAtom atom;
            atom.ref = {0, slot.target_column};
            atom.column_name = col.name;
            atom.role = col.role;
            atom.type = col.type;
            atom.dim_index = col.dim_index;
            atom.positional = col.role == ColumnRole::DimPosition;
            atom.op = CmpOp::Ge;
            atom.values = {bounds[slot.env_dim].first};
            conj.children.push_back({BoundPred::Kind::Atom, atom, {}});
            atom.op = CmpOp::Le;
            atom.values = {bounds[slot.env_dim].second};
            conj.children.push_back({BoundPred::Kind::Atom, atom, {}});
        }
        disjunction.children.push_back(std::move(conj));
    }
    return disjunction;
}

// ------------------------------------------------------------------- planning

namespace {

std::vector<GlobalDimInfo> build_dim_context(const DatasetDescriptor& ds) {
    std::vector<GlobalDimInfo> dims;
    GridFileHandle first = open_grid_file(ds.files.front());
    for (const DimInfo& d : ds.schema.dims) {
        GlobalDimInfo info;
        info.name = d.name;
        info.length = d.length;
        info.spanning = d.spanning;
        info.time_units = d.time_units;
        if (!d.spanning) {
            info.axis = first.read_axis(d.name);
            if (d.time_units)
                for (double& v : info.axis.values) v = decode_time(v, *d.time_units);
        }
        dims.push_back(std::move(info));
    }
    return dims;
}

LocalFileView build_file_view(const std::string& path, std::span<const GlobalDimInfo> dims) {
    GridFileHandle handle = open_grid_file(path);
    const FileSchema& hdr = handle.header();
    LocalFileView view;
    view.path = path;
    view.dim_lengths.resize(dims.size());
    view.spanning_axes.resize(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
        int di = hdr.find_dim(dims[k].name);
        if (di < 0) fail(Errc::SchemaMismatch, "'" + path + "' is missing dimension '" + dims[k].name + "'");
        view.dim_lengths[k] = handle.dim_length(di);
        if (!dims[k].spanning && view.dim_lengths[k] != dims[k].length)
            fail(Errc::SchemaMismatch, "'" + path + "' non-spanning dimension '" + dims[k].name +
                                           "' has length " + std::to_string(view.dim_lengths[k]) + ", expected " +
                                           std::to_string(dims[k].length));
        if (dims[k].spanning) {
            CoordinateAxis axis = handle.read_axis(dims[k].name);
            if (dims[k].time_units)
                for (double& v : axis.values) v = decode_time(v, *dims[k].time_units);
            view.spanning_axes[k] = std::move(axis);
        }
    }
    return view;
}

} // namespace

Engine::Engine(Catalog catalog, EngineOptions opts) : catalog_(std::move(catalog)), opts_(opts) {}

void Engine::attach_envelopes(const std::string& dataset, const std::vector<std::string>& dims) {
    catalog_.set_envelopes(dataset, compute_envelopes(catalog_.get(dataset), dims));
}

PhysicalPlan Engine::plan(const BoundQuery& query) const {
    PhysicalPlan plan;
    plan.query = query;
    plan.from_scan.dataset = query.from;
    if (query.join_dataset) {
        plan.join_scan.emplace();
        plan.join_scan->dataset = *query.join_dataset;
    }

    // split the predicate into per-side scan filters and a post-join part
    std::vector<BoundPred> side_parts[2];
    std::vector<BoundPred> post_parts;
    if (query.where) {
        std::vector<BoundPred> conjuncts;
        flatten_conjuncts(*query.where, conjuncts);
        for (auto& c : conjuncts) {
            std::set<int> sides;
            collect_sides(c, sides);
            if (sides.size() == 1)
                side_parts[*sides.begin()].push_back(std::move(c));
            else
                post_parts.push_back(std::move(c));
        }
    }

    // envelopes on the build side prune the probe side of the join
    if (plan.join_scan && query.from.envelopes) {
        auto injected = envelope_injection_predicate(query.from, *query.join_dataset, query.join_keys,
                                                     /*for_left_side=*/false);
        if (injected) {
            plan.injected_envelope = injected;
            side_parts[1].push_back(std::move(*injected));
            // the redundant twin filter on the build side itself
            auto mirror = envelope_injection_predicate(query.from, *query.join_dataset, query.join_keys,
                                                       /*for_left_side=*/true);
            side_parts[0].push_back(std::move(*mirror));
        }
    }

    plan.post_join_filter = conjoin(std::move(post_parts));

    for (int side = 0; side < 2; ++side) {
        ScanSpec* spec = side == 0 ? &plan.from_scan : plan.join_scan ? &*plan.join_scan : nullptr;
        if (!spec) {
            if (!side_parts[side].empty())
                fail(Errc::UnknownColumn, "predicate references a dataset that is not part of the query");
            continue;
        }
        if (auto pred = conjoin(std::move(side_parts[side]))) spec->predicate = remap_to_side0(std::move(*pred));

        // projected variables: select list, whole predicate, and join keys
        std::set<int> cols;
        for (const auto& item : query.select)
            if (item.expr) collect_var_columns(*item.expr, side, cols);
        if (query.where) collect_pred_columns(*query.where, side, cols);
        if (spec->predicate) collect_pred_columns(*spec->predicate, 0, cols);
        for (const auto& [lref, rref] : query.join_keys) cols.insert(side == 0 ? lref.column : rref.column);
        for (int col : cols) {
            const RowColumn& rc = spec->dataset.row_schema.columns[static_cast<std::size_t>(col)];
            if (rc.role == ColumnRole::Variable) spec->projected_vars.push_back(rc.var_index);
        }
        std::sort(spec->projected_vars.begin(), spec->projected_vars.end());
        spec->projected_vars.erase(std::unique(spec->projected_vars.begin(), spec->projected_vars.end()),
                                   spec->projected_vars.end());

        if (spec->dataset.kind == DatasetKind::Grid) {
            spec->dims = build_dim_context(spec->dataset);
            RewriteOptions ropts;
            ropts.clause_cap = opts_.dnf_clause_cap;
            if (spec->predicate)
                spec->dnf = normalize_to_dnf(*spec->predicate, ropts);
            else
                spec->dnf.clauses.push_back(DnfClause{});
            spec->global = rewrite_global(spec->dnf, spec->dims);

            spec->locals.resize(spec->dataset.files.size());
            detail::parallel_for(spec->dataset.files.size(), detail::effective_workers(opts_), [&](std::size_t i) {
                LocalFileView view = build_file_view(spec->dataset.files[i], spec->dims);
                spec->locals[i] = rewrite_local(spec->global, spec->dims, view);
            });
        }
    }

    // output columns
    if (query.aggregate) {
        plan.output = Aggregator::output_columns(query.select);
    } else {
        for (const auto& item : query.select) {
            ColumnType type = ColumnType::Float64;
            if (item.expr->kind == BoundExpr::Kind::Column) type = item.expr->col_type;
            plan.output.push_back({item.name, type});
        }
    }

    plan.explain_text = [&] {
        std::string out;
        out += "== query ==\n" + print_query(query.ast) + "\n";
        out += "== predicate ==\n";
        out += query.ast.where ? print_pred(*query.ast.where) : "(none)";
        out += "\n";
        auto describe_scan = [&](const ScanSpec& spec) {
            out += "== scan " + spec.dataset.name + " ==\n";
            if (spec.dataset.kind == DatasetKind::Tabular) {
                out += "kind: tabular\n";
                out += "row filter: " + (spec.predicate ? print_bound_pred(*spec.predicate) : "(none)") + "\n";
                return;
            }
            out += "dnf:\n";
            for (std::size_t i = 0; i < spec.dnf.clauses.size(); ++i) {
                out += "  clause " + std::to_string(i + 1) + ": ";
                for (std::size_t a = 0; a < spec.dnf.clauses[i].atoms.size(); ++a) {
                    if (a > 0) out += " AND ";
                    out += print_bound_atom(spec.dnf.clauses[i].atoms[a]);
                }
                if (spec.dnf.clauses[i].atoms.empty()) out += "TRUE";
                out += "\n";
            }
            out += "global clauses:\n";
            for (std::size_t i = 0; i < spec.global.clauses.size(); ++i)
                out += "  clause " + std::to_string(i + 1) + ": " +
                       describe_global_clause(spec.global.clauses[i], spec.dims) + "\n";
            out += "files:\n";
            for (std::size_t i = 0; i < spec.locals.size(); ++i) {
                const LocalPlan& lp = spec.locals[i];
                out += "  " + spec.dataset.files[i] + ": ";
                if (lp.blocks.empty()) {
                    out += "skipped\n";
                    continue;
                }
                std::int64_t cells = 0;
                for (const Block& b : lp.blocks) cells += b.cells();
                out += std::to_string(lp.blocks.size()) + (lp.blocks.size() == 1 ? " block" : " blocks") + ", " +
                       std::to_string(cells) + " cells";
                if (lp.blocks.size() <= 4) {
                    // locally rewritten form, all dimensions positional
                    for (const Block& b : lp.blocks) {
                        out += "\n    ";
                        for (std::size_t k = 0; k < b.rank(); ++k) {
                            if (k > 0) out += " AND ";
                            out += b.dims[k] + "Pos >= " + format_int(b.start[k]) + " AND " + b.dims[k] +
                                   "Pos <= " + format_int(b.end[k]);
                        }
                    }
                }
                out += "\n";
            }
            out += "projected variables:";
            if (spec.projected_vars.empty()) out += " (none)";
            for (int vi : spec.projected_vars)
                out += " " + spec.dataset.schema.variables[static_cast<std::size_t>(vi)];
            out += "\n";
        };
        describe_scan(plan.from_scan);
        if (plan.join_scan) describe_scan(*plan.join_scan);
        out += "== envelope injection ==\n";
        out += plan.injected_envelope ? print_bound_pred(*plan.injected_envelope) : "(none)";
        out += "\n";
        if (plan.post_join_filter) out += "== post-join filter ==\n" + print_bound_pred(*plan.post_join_filter) + "\n";
        out += "== output ==\n";
        for (const auto& col : plan.output) out += col.name + " " + column_type_name(col.type) + "\n";
        return out;
    }();
    return plan;
}

// ------------------------------------------------------------------ execution

namespace {

std::string key_bytes(const RowBatch& batch, const std::vector<ColumnRef>& refs, std::size_t row) {
    std::string key;
    key.resize(refs.size() * sizeof(double));
    for (std::size_t k = 0; k < refs.size(); ++k) {
        double v = batch.at(refs[k]).num_at(row);
        if (v == 0.0) v = 0.0; // normalize -0.0
        std::memcpy(key.data() + k * sizeof(double), &v, sizeof(double));
    }
    return key;
}

} // namespace

QueryResult Engine::execute(const PhysicalPlan& plan) const {
    auto t0 = std::chrono::steady_clock::now();
    QueryResult result;
    result.columns = plan.output;

    std::vector<RowBatch> left = execute_scan(plan.from_scan, opts_, result.stats);

    std::vector<RowBatch> combined;
    if (!plan.join_scan) {
        combined = std::move(left);
    } else {
        std::vector<RowBatch> right = execute_scan(*plan.join_scan, opts_, result.stats);

        std::vector<ColumnRef> lkeys, rkeys;
        for (const auto& [lref, rref] : plan.query.join_keys) {
            lkeys.push_back({0, lref.column});
            rkeys.push_back({0, rref.column});
        }

        // build on the FROM side, probe with the joined dataset
        std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> table;
        for (std::uint32_t bi = 0; bi < left.size(); ++bi)
            for (std::uint32_t r = 0; r < left[bi].rows; ++r)
                table[key_bytes(left[bi], lkeys, r)].emplace_back(bi, r);

        const std::size_t lcols = plan.from_scan.dataset.row_schema.columns.size();
        const std::size_t rcols = plan.join_scan->dataset.row_schema.columns.size();
        for (const RowBatch& rb : right) {
            RowBatch out;
            out.left_width = lcols;
            out.columns.resize(lcols + rcols);
            for (std::size_t c = 0; c < lcols; ++c)
                out.columns[c].type = plan.from_scan.dataset.row_schema.columns[c].type;
            for (std::size_t c = 0; c < rcols; ++c)
                out.columns[lcols + c].type = plan.join_scan->dataset.row_schema.columns[c].type;

            for (std::size_t r = 0; r < rb.rows; ++r) {
                auto it = table.find(key_bytes(rb, rkeys, r));
                if (it == table.end()) continue;
                for (const auto& [bi, lr] : it->second) {
                    const RowBatch& lb = left[bi];
                    for (std::size_t c = 0; c < lcols; ++c) {
                        if (lb.columns[c].size() == 0) continue;
                        append_value(out.columns[c], lb.columns[c], lr);
                    }
                    for (std::size_t c = 0; c < rcols; ++c) {
                        if (rb.columns[c].size() == 0) continue;
                        append_value(out.columns[lcols + c], rb.columns[c], r);
                    }
                    ++out.rows;
                }
            }
            if (out.rows > 0) combined.push_back(std::move(out));
        }
    }

    if (plan.post_join_filter) {
        std::vector<RowBatch> filtered;
        for (const RowBatch& b : combined) {
            RowBatch f = filter_batch(b, *plan.post_join_filter);
            if (f.rows > 0) filtered.push_back(std::move(f));
        }
        combined = std::move(filtered);
    }

    if (plan.query.aggregate) {
        Aggregator agg(plan.query.select);
        for (const RowBatch& b : combined) agg.fold(b);
        result.batches.push_back(agg.result());
    } else {
        for (const RowBatch& b : combined) {
            if (b.rows == 0) continue;
            RowBatch out;
            out.rows = b.rows;
            out.left_width = plan.output.size();
            for (std::size_t i = 0; i < plan.query.select.size(); ++i) {
                const BoundSelectItem& item = plan.query.select[i];
                if (item.expr->kind == BoundExpr::Kind::Column) {
                    out.columns.push_back(b.at(item.expr->ref));
                } else {
                    out.columns.push_back(evaluate_expression(*item.expr, b));
                }
            }
            result.batches.push_back(std::move(out));
        }
    }

    result.stats.rows_emitted = result.row_count();
    result.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

QueryResult Engine::run(const std::string& query_text) const {
    auto t0 = std::chrono::steady_clock::now();
    QueryAst ast = parse_query(query_text);
    BoundQuery bound = bind(ast, catalog_);
    PhysicalPlan p = plan(bound);
    QueryResult result = execute(p);
    result.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::string Engine::explain(const std::string& query_text) const {
    QueryAst ast = parse_query(query_text);
    BoundQuery bound = bind(ast, catalog_);
    return plan(bound).explain_text;
}

} // namespace gridlight
