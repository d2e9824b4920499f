#include "gridlight/rewrite.hpp"

#include "gridlight/textutil.hpp"

#include <algorithm>
#include <cmath>

namespace gridlight {

void ValueInterval::apply(CmpOp op, double v) {
    switch (op) {
        case CmpOp::Gt:
            if (v > lo || (v == lo && !lo_strict)) {
                lo = v;
                lo_strict = true;
            }
            break;
        case CmpOp::Ge:
            if (v > lo) {
                lo = v;
                lo_strict = false;
            }
            break;
        case CmpOp::Lt:
            if (v < hi || (v == hi && !hi_strict)) {
                hi = v;
                hi_strict = true;
            }
            break;
        case CmpOp::Le:
            if (v < hi) {
                hi = v;
                hi_strict = false;
            }
            break;
        case CmpOp::Eq:
            apply(CmpOp::Ge, v);
            apply(CmpOp::Le, v);
            break;
        default:
            fail(Errc::TypeMismatch, "operator not representable as a value interval");
    }
}

bool ValueInterval::contains(double v) const {
    if (lo_strict ? v <= lo : v < lo) return false;
    if (hi_strict ? v >= hi : v > hi) return false;
    return true;
}

// ------------------------------------------------------------- normalization

namespace {

BoundPred push_not(const BoundPred& p, bool negate) {
    BoundPred out;
    switch (p.kind) {
        case BoundPred::Kind::Atom:
            out.kind = BoundPred::Kind::Atom;
            out.atom = p.atom;
            if (negate) out.atom.op = negate_cmp(out.atom.op);
            break;
        case BoundPred::Kind::Not:
            return push_not(p.children[0], !negate);
        case BoundPred::Kind::And:
        case BoundPred::Kind::Or: {
            bool is_and = p.kind == BoundPred::Kind::And;
            out.kind = (is_and != negate) ? BoundPred::Kind::And : BoundPred::Kind::Or;
            for (const auto& c : p.children) out.children.push_back(push_not(c, negate));
            break;
        }
    }
    return out;
}

BoundAtom with_op(const BoundAtom& a, CmpOp op, double v) {
    BoundAtom out = a;
    out.op = op;
    out.values = {v};
    return out;
}

// equalities and memberships on dimension columns become inequalities
BoundPred expand_dim_equalities(const BoundPred& p) {
    BoundPred out;
    switch (p.kind) {
        case BoundPred::Kind::Atom: {
            const BoundAtom& a = p.atom;
            if (!a.on_dimension() || a.op == CmpOp::Lt || a.op == CmpOp::Le || a.op == CmpOp::Gt ||
                a.op == CmpOp::Ge) {
                out.kind = BoundPred::Kind::Atom;
                out.atom = a;
                return out;
            }
            auto eq_pair = [&](double v) {
                BoundPred both;
                both.kind = BoundPred::Kind::And;
                both.children.push_back({BoundPred::Kind::Atom, with_op(a, CmpOp::Ge, v), {}});
                both.children.push_back({BoundPred::Kind::Atom, with_op(a, CmpOp::Le, v), {}});
                return both;
            };
            auto ne_pair = [&](double v) {
                BoundPred either;
                either.kind = BoundPred::Kind::Or;
                either.children.push_back({BoundPred::Kind::Atom, with_op(a, CmpOp::Lt, v), {}});
                either.children.push_back({BoundPred::Kind::Atom, with_op(a, CmpOp::Gt, v), {}});
                return either;
            };
            switch (a.op) {
                case CmpOp::Eq: return eq_pair(a.values.at(0));
                case CmpOp::Ne: return ne_pair(a.values.at(0));
                case CmpOp::In: {
                    out.kind = BoundPred::Kind::Or;
                    for (double v : a.values) out.children.push_back(eq_pair(v));
                    return out;
                }
                case CmpOp::NotIn: {
                    out.kind = BoundPred::Kind::And;
                    for (double v : a.values) out.children.push_back(ne_pair(v));
                    return out;
                }
                default: break;
            }
            out.kind = BoundPred::Kind::Atom;
            out.atom = a;
            return out;
        }
        case BoundPred::Kind::Not:
            fail(Errc::PredicateTooComplex, "negation survived normalization"); // unreachable
        case BoundPred::Kind::And:
        case BoundPred::Kind::Or:
            out.kind = p.kind;
            for (const auto& c : p.children) out.children.push_back(expand_dim_equalities(c));
            return out;
    }
    return out;
}

std::vector<DnfClause> to_clauses(const BoundPred& p, std::int64_t cap) {
    switch (p.kind) {
        case BoundPred::Kind::Atom: {
            DnfClause c;
            c.atoms.push_back(p.atom);
            return {std::move(c)};
        }
        case BoundPred::Kind::Or: {
            std::vector<DnfClause> out;
            for (const auto& child : p.children) {
                auto sub = to_clauses(child, cap);
                out.insert(out.end(), std::make_move_iterator(sub.begin()), std::make_move_iterator(sub.end()));
                if (static_cast<std::int64_t>(out.size()) > cap)
                    fail(Errc::PredicateTooComplex,
                         "normalization produced more than " + std::to_string(cap) + " clauses");
            }
            return out;
        }
        case BoundPred::Kind::And: {
            std::vector<DnfClause> out{DnfClause{}};
            for (const auto& child : p.children) {
                auto sub = to_clauses(child, cap);
                std::vector<DnfClause> next;
                if (static_cast<std::int64_t>(out.size() * sub.size()) > cap)
                    fail(Errc::PredicateTooComplex,
                         "normalization produced more than " + std::to_string(cap) + " clauses");
                next.reserve(out.size() * sub.size());
                for (const auto& left : out) {
                    for (const auto& right : sub) {
                        DnfClause merged = left;
                        merged.atoms.insert(merged.atoms.end(), right.atoms.begin(), right.atoms.end());
                        next.push_back(std::move(merged));
                    }
                }
                out = std::move(next);
            }
            return out;
        }
        case BoundPred::Kind::Not:
            fail(Errc::PredicateTooComplex, "negation survived normalization"); // unreachable
    }
    return {};
}

} // namespace

DnfPredicate normalize_to_dnf(const BoundPred& pred, const RewriteOptions& opts) {
    BoundPred no_not = push_not(pred, false);
    BoundPred expanded = expand_dim_equalities(no_not);
    DnfPredicate dnf;
    dnf.clauses = to_clauses(expanded, opts.clause_cap);
    return dnf;
}

// ---------------------------------------------------------------- translation

PositionalInterval translate_value_to_position(const CoordinateAxis& axis, CmpOp op, double value) {
    const auto& vals = axis.values;
    const auto n = static_cast<std::int64_t>(vals.size());
    if (n == 0) return PositionalInterval::empty_interval();

    auto prefix_len = [&](auto&& pred) {
        return static_cast<std::int64_t>(
            std::partition_point(vals.begin(), vals.end(), pred) - vals.begin());
    };

    PositionalInterval out{0, n - 1};
    if (axis.ascending) {
        switch (op) {
            case CmpOp::Ge: out.lo = prefix_len([&](double x) { return x < value; }); break;
            case CmpOp::Gt: out.lo = prefix_len([&](double x) { return x <= value; }); break;
            case CmpOp::Le: out.hi = prefix_len([&](double x) { return x <= value; }) - 1; break;
            case CmpOp::Lt: out.hi = prefix_len([&](double x) { return x < value; }) - 1; break;
            default: fail(Errc::TypeMismatch, "only inequalities can be translated");
        }
    } else {
        switch (op) {
            case CmpOp::Ge: out.hi = prefix_len([&](double x) { return x >= value; }) - 1; break;
            case CmpOp::Gt: out.hi = prefix_len([&](double x) { return x > value; }) - 1; break;
            case CmpOp::Le: out.lo = prefix_len([&](double x) { return x > value; }); break;
            case CmpOp::Lt: out.lo = prefix_len([&](double x) { return x >= value; }); break;
            default: fail(Errc::TypeMismatch, "only inequalities can be translated");
        }
    }
    if (out.empty()) return PositionalInterval::empty_interval();
    return out;
}

PositionalInterval translate_position_atom(std::int64_t length, CmpOp op, double value) {
    PositionalInterval out{0, length - 1};
    switch (op) {
        case CmpOp::Ge: out.lo = static_cast<std::int64_t>(std::ceil(value)); break;
        case CmpOp::Gt: out.lo = static_cast<std::int64_t>(std::floor(value)) + 1; break;
        case CmpOp::Le: out.hi = static_cast<std::int64_t>(std::floor(value)); break;
        case CmpOp::Lt: out.hi = static_cast<std::int64_t>(std::ceil(value)) - 1; break;
        default: fail(Errc::TypeMismatch, "only inequalities can be translated");
    }
    out.lo = std::max<std::int64_t>(out.lo, 0);
    out.hi = std::min(out.hi, length - 1);
    if (out.empty()) return PositionalInterval::empty_interval();
    return out;
}

// ------------------------------------------------------------ global rewriting

GlobalQuery rewrite_global(const DnfPredicate& dnf, std::span<const GlobalDimInfo> dims) {
    GlobalQuery gq;
    for (const DnfClause& clause : dnf.clauses) {
        GlobalClause gc;
        gc.intervals.resize(dims.size());
        gc.spanning.resize(dims.size());
        for (std::size_t k = 0; k < dims.size(); ++k)
            if (!dims[k].spanning) gc.intervals[k] = PositionalInterval::full(dims[k].length);

        bool clause_empty = false;
        for (const BoundAtom& atom : clause.atoms) {
            if (!atom.on_dimension() || atom.ref.side != 0) {
                gc.residuals.push_back(atom);
                continue;
            }
            const auto k = static_cast<std::size_t>(atom.dim_index);
            const GlobalDimInfo& dim = dims[k];
            if (dim.spanning) {
                gc.spanning[k].apply(atom.op, atom.values.at(0));
                continue;
            }
            PositionalInterval iv = atom.positional
                                        ? translate_position_atom(dim.length, atom.op, atom.values.at(0))
                                        : translate_value_to_position(dim.axis, atom.op, atom.values.at(0));
            gc.intervals[k] = gc.intervals[k].intersect(iv);
            if (gc.intervals[k].empty()) {
                clause_empty = true;
                break;
            }
        }
        if (clause_empty) continue;

        // a spanning bound that is itself contradictory eliminates the clause
        for (std::size_t k = 0; k < dims.size() && !clause_empty; ++k) {
            const ValueInterval& vi = gc.spanning[k];
            if (dims[k].spanning && (vi.lo > vi.hi || (vi.lo == vi.hi && (vi.lo_strict || vi.hi_strict))))
                clause_empty = true;
        }
        if (!clause_empty) gq.clauses.push_back(std::move(gc));
    }
    return gq;
}

// ------------------------------------------------------------- local rewriting

LocalPlan rewrite_local(const GlobalQuery& gq, std::span<const GlobalDimInfo> dims, const LocalFileView& file) {
    LocalPlan plan;
    plan.file = file.path;

    std::vector<std::string> dim_names(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) dim_names[k] = dims[k].name;

    std::vector<Block> candidates;
    for (const GlobalClause& gc : gq.clauses) {
        ClauseFilter filter;
        filter.intervals.resize(dims.size());
        bool empty = false;
        for (std::size_t k = 0; k < dims.size() && !empty; ++k) {
            if (!dims[k].spanning) {
                filter.intervals[k] = gc.intervals[k];
            } else {
                const ValueInterval& vi = gc.spanning[k];
                PositionalInterval iv = PositionalInterval::full(file.dim_lengths[k]);
                if (!vi.unconstrained()) {
                    const CoordinateAxis& axis = *file.spanning_axes[k];
                    if (!std::isinf(vi.lo))
                        iv = iv.intersect(
                            translate_value_to_position(axis, vi.lo_strict ? CmpOp::Gt : CmpOp::Ge, vi.lo));
                    if (!std::isinf(vi.hi))
                        iv = iv.intersect(
                            translate_value_to_position(axis, vi.hi_strict ? CmpOp::Lt : CmpOp::Le, vi.hi));
                }
                filter.intervals[k] = iv;
            }
            if (filter.intervals[k].empty()) empty = true;
        }
        if (empty) continue;

        Block candidate;
        candidate.dims = dim_names;
        candidate.start.resize(dims.size());
        candidate.end.resize(dims.size());
        for (std::size_t k = 0; k < dims.size(); ++k) {
            candidate.start[k] = filter.intervals[k].lo;
            candidate.end[k] = filter.intervals[k].hi;
        }
        candidates.push_back(std::move(candidate));
        filter.residuals = gc.residuals;
        if (!filter.residuals.empty()) plan.needs_row_filter = true;
        plan.clauses.push_back(std::move(filter));
    }

    if (!candidates.empty()) plan.blocks = cover_optimized(candidates).first;
    return plan;
}

// ------------------------------------------------------------------ rendering

std::string describe_global_clause(const GlobalClause& clause, std::span<const GlobalDimInfo> dims) {
    std::vector<std::string> parts;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const GlobalDimInfo& dim = dims[k];
        if (!dim.spanning) continue;
        const ValueInterval& vi = clause.spanning[k];
        auto fmt = [&](double v) {
            if (dim.time_units) return "'" + format_timestamp(static_cast<std::int64_t>(v)) + "'";
            return format_number(v);
        };
        if (!std::isinf(vi.lo)) parts.push_back(dim.name + (vi.lo_strict ? " > " : " >= ") + fmt(vi.lo));
        if (!std::isinf(vi.hi)) parts.push_back(dim.name + (vi.hi_strict ? " < " : " <= ") + fmt(vi.hi));
    }
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const GlobalDimInfo& dim = dims[k];
        if (dim.spanning) continue;
        const PositionalInterval& iv = clause.intervals[k];
        parts.push_back(dim.name + "Pos >= " + format_int(iv.lo));
        parts.push_back(dim.name + "Pos <= " + format_int(iv.hi));
    }
    for (const BoundAtom& atom : clause.residuals) parts.push_back(print_bound_atom(atom));

    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += " AND ";
        out += parts[i];
    }
    return out.empty() ? "TRUE" : out;
}

} // namespace gridlight
