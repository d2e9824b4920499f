#pragma once

#include "gridlight/blockcover.hpp"
#include "gridlight/queryir.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>

namespace gridlight {

/// Inclusive positional range; lo > hi encodes the designated EMPTY marker.
struct PositionalInterval {
    std::int64_t lo = 0;
    std::int64_t hi = -1;

    bool empty() const { return lo > hi; }

    static PositionalInterval empty_interval() { return {0, -1}; }
    static PositionalInterval full(std::int64_t length) { return {0, length - 1}; }

    PositionalInterval intersect(const PositionalInterval& o) const {
        return {std::max(lo, o.lo), std::min(hi, o.hi)};
    }

    bool operator==(const PositionalInterval&) const = default;
};

/// Closed/open value bounds accumulated from the atoms of one conjunctive
/// clause over one spanning dimension.
struct ValueInterval {
    double lo = -std::numeric_limits<double>::infinity();
    bool lo_strict = false;
    double hi = std::numeric_limits<double>::infinity();
    bool hi_strict = false;

    bool unconstrained() const { return std::isinf(lo) && lo < 0 && std::isinf(hi) && hi > 0; }

    void apply(CmpOp op, double v);
    bool contains(double v) const;
};

struct DnfClause {
    std::vector<BoundAtom> atoms;
};

struct DnfPredicate {
    std::vector<DnfClause> clauses;
};

struct RewriteOptions {
    std::int64_t clause_cap = 4096;
};

/// Three passes: push NOT inward, expand (in)equalities on dimension columns,
/// distribute AND over OR. Throws PredicateTooComplex past the clause cap.
DnfPredicate normalize_to_dnf(const BoundPred& pred, const RewriteOptions& opts = {});

/// Positions p with axis.values[p] `op` value, via binary search; the
/// comparison direction flips automatically on descending axes.
PositionalInterval translate_value_to_position(const CoordinateAxis& axis, CmpOp op, double value);

/// Direct translation for <dim>Pos atoms (the threshold may be fractional).
PositionalInterval translate_position_atom(std::int64_t length, CmpOp op, double value);

/// Rewriting context for one dimension of a dataset.
struct GlobalDimInfo {
    std::string name;
    std::int64_t length = 0;
    bool spanning = false;
    CoordinateAxis axis; // non-spanning dims: from the dataset's first file
    std::optional<TimeUnits> time_units;
};

struct GlobalClause {
    std::vector<PositionalInterval> intervals; // per dim; meaningful for non-spanning dims
    std::vector<ValueInterval> spanning;       // per dim; meaningful for spanning dims
    std::vector<BoundAtom> residuals;
};

/// Every clause carries exactly one positional interval per non-spanning
/// dimension (non-selective when unfiltered); clauses that became empty are
/// dropped; spanning value atoms and residual atoms are carried through.
struct GlobalQuery {
    std::vector<GlobalClause> clauses;
};

GlobalQuery rewrite_global(const DnfPredicate& dnf, std::span<const GlobalDimInfo> dims);

/// Per-file view used by local rewriting: the file's dimension lengths and
/// its axes for the spanning dimensions (values decoded for time axes).
struct LocalFileView {
    std::string path;
    std::vector<std::int64_t> dim_lengths;
    std::vector<std::optional<CoordinateAxis>> spanning_axes;
};

struct ClauseFilter {
    std::vector<PositionalInterval> intervals; // all dims resolved
    std::vector<BoundAtom> residuals;
};

struct LocalPlan {
    std::string file;
    std::vector<Block> blocks; // pairwise disjoint; empty means the file is skipped
    std::vector<ClauseFilter> clauses;
    bool needs_row_filter = false;
};

/// Resolves each clause's spanning-dimension value bounds against the file's
/// axes, discards clauses with an empty interval, and applies the disjoint
/// cover to the surviving candidate blocks.
LocalPlan rewrite_local(const GlobalQuery& gq, std::span<const GlobalDimInfo> dims, const LocalFileView& file);

/// Listing-style rendering, e.g.
/// "time > '2017-01-01 00:15:00' AND latPos >= 119 AND latPos <= 279".
std::string describe_global_clause(const GlobalClause& clause, std::span<const GlobalDimInfo> dims);

} // namespace gridlight
