#pragma once

#include "gridlight/catalog.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gridlight {

// ---------------------------------------------------------------- scalar AST

enum class BinaryOp { Add, Sub, Mul, Div };
enum class UnaryFunc { Neg, Sqrt, Exp, Ln, Abs };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Column, Number, String, Binary, Unary };

    Kind kind = Kind::Number;
    std::string column; // Column, possibly "dataset.column"
    double number = 0.0;
    std::string text; // String
    BinaryOp bin_op = BinaryOp::Add;
    ExprPtr lhs, rhs;
    UnaryFunc func = UnaryFunc::Neg;
    ExprPtr arg;
};

// ----------------------------------------------------------------- predicates

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne, In, NotIn };

const char* cmp_op_text(CmpOp op);
CmpOp negate_cmp(CmpOp op);

struct Literal {
    bool is_text = false;
    double number = 0.0;
    std::string text;
};

struct Atom {
    std::string column;
    CmpOp op = CmpOp::Eq;
    std::vector<Literal> values;          // one for comparisons, many for (NOT) IN
    std::optional<std::string> rhs_column; // column-to-column form, rejected at bind
};

struct Pred {
    enum class Kind { Atom, And, Or, Not };

    Kind kind = Kind::Atom;
    Atom atom;
    std::vector<Pred> children;

    static Pred make_atom(Atom a);
    static Pred make_and(std::vector<Pred> cs);
    static Pred make_or(std::vector<Pred> cs);
    static Pred make_not(Pred c);
};

// --------------------------------------------------------------------- query

enum class AggKind { None, Count, Min, Max, Mean, Histogram };

struct SelectItem {
    AggKind agg = AggKind::None;
    ExprPtr expr; // null for count(*)
    double hist_lo = 0.0, hist_hi = 0.0;
    std::int64_t hist_bins = 0;
    std::string alias;
};

struct JoinSpec {
    std::string dataset;
    std::vector<std::pair<std::string, std::string>> keys;
};

struct QueryAst {
    std::vector<SelectItem> select;
    std::string from;
    std::optional<JoinSpec> join;
    std::optional<Pred> where;
};

/// Throws Errc::SyntaxError with the offending position and expectation.
QueryAst parse_query(const std::string& text);

std::string print_query(const QueryAst& ast);
std::string print_pred(const Pred& p);
std::string print_expr(const Expr& e);

// ---------------------------------------------------------------- bound form

struct ColumnRef {
    int side = 0;    // 0 = FROM dataset, 1 = JOIN dataset
    int column = -1; // index into the side's RowSchema

    bool operator==(const ColumnRef&) const = default;
};

struct BoundAtom {
    ColumnRef ref;
    std::string column_name;
    ColumnRole role = ColumnRole::Variable;
    ColumnType type = ColumnType::Float64;
    int dim_index = -1;
    bool positional = false; // atom over a <dim>Pos column
    CmpOp op = CmpOp::Eq;
    std::vector<double> values; // timestamps encoded as epoch seconds

    bool on_dimension() const {
        return role == ColumnRole::SpanningDim || role == ColumnRole::Dim || role == ColumnRole::DimPosition;
    }
};

struct BoundPred {
    enum class Kind { Atom, And, Or, Not };

    Kind kind = Kind::Atom;
    BoundAtom atom;
    std::vector<BoundPred> children;
};

struct BoundExpr;
using BoundExprPtr = std::shared_ptr<const BoundExpr>;

struct BoundExpr {
    enum class Kind { Column, Number, Binary, Unary };

    Kind kind = Kind::Number;
    ColumnRef ref;
    ColumnType col_type = ColumnType::Float64;
    std::string column_name;
    double number = 0.0;
    BinaryOp bin_op = BinaryOp::Add;
    BoundExprPtr lhs, rhs;
    UnaryFunc func = UnaryFunc::Neg;
    BoundExprPtr arg;
};

struct BoundSelectItem {
    AggKind agg = AggKind::None;
    BoundExprPtr expr; // null for count(*)
    double hist_lo = 0.0, hist_hi = 0.0;
    std::int64_t hist_bins = 0;
    std::string name;
};

struct BoundQuery {
    QueryAst ast;
    DatasetDescriptor from;
    std::optional<DatasetDescriptor> join_dataset;
    std::vector<std::pair<ColumnRef, ColumnRef>> join_keys; // (from side, join side)
    std::vector<BoundSelectItem> select;
    std::optional<BoundPred> where;
    bool aggregate = false;
};

/// Resolves columns against the registered row schemas, converts timestamp
/// literals, and annotates every atom as a dimension atom or a residual atom.
BoundQuery bind(const QueryAst& ast, const Catalog& catalog);

std::string print_bound_atom(const BoundAtom& atom);

} // namespace gridlight
