#include "gridlight/queryir.hpp"

#include "gridlight/textutil.hpp"

#include <cctype>
#include <cmath>
#include <unordered_map>

namespace gridlight {

const char* cmp_op_text(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
        case CmpOp::Eq: return "==";
        case CmpOp::Ne: return "!=";
        case CmpOp::In: return "IN";
        case CmpOp::NotIn: return "NOT IN";
    }
    return "?";
}

CmpOp negate_cmp(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return CmpOp::Ge;
        case CmpOp::Le: return CmpOp::Gt;
        case CmpOp::Gt: return CmpOp::Le;
        case CmpOp::Ge: return CmpOp::Lt;
        case CmpOp::Eq: return CmpOp::Ne;
        case CmpOp::Ne: return CmpOp::Eq;
        case CmpOp::In: return CmpOp::NotIn;
        case CmpOp::NotIn: return CmpOp::In;
    }
    return op;
}

Pred Pred::make_atom(Atom a) {
    Pred p;
    p.kind = Kind::Atom;
    p.atom = std::move(a);
    return p;
}
Pred Pred::make_and(std::vector<Pred> cs) {
    Pred p;
    p.kind = Kind::And;
    p.children = std::move(cs);
    return p;
}
Pred Pred::make_or(std::vector<Pred> cs) {
    Pred p;
    p.kind = Kind::Or;
    p.children = std::move(cs);
    return p;
}
Pred Pred::make_not(Pred c) {
    Pred p;
    p.kind = Kind::Not;
    p.children.push_back(std::move(c));
    return p;
}

// ---------------------------------------------------------------------- lexer

namespace {

enum class Tok {
    End, Ident, Number, String,
    Comma, Dot, LParen, RParen,
    Star, Plus, Minus, Slash,
    Lt, Le, Gt, Ge, Eq, Ne,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    std::size_t pos = 0;
};

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

[[noreturn]] void syntax_error(std::size_t pos, const std::string& expected, const std::string& got) {
    fail(Errc::SyntaxError, "at position " + std::to_string(pos) + ": expected " + expected + ", got " + got);
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < n && text[i + 1] == '-') {
            while (i < n && text[i] != '\n') ++i;
            continue;
        }
        Token t;
        t.pos = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
            t.kind = Tok::Ident;
            t.text = text.substr(i, j - i);
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < n && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
            if (j < n && (text[j] == 'e' || text[j] == 'E')) {
                ++j;
                if (j < n && (text[j] == '+' || text[j] == '-')) ++j;
                while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            t.kind = Tok::Number;
            t.text = text.substr(i, j - i);
            try {
                t.number = std::stod(t.text);
            } catch (...) {
                syntax_error(i, "a number", "'" + t.text + "'");
            }
            i = j;
        } else if (c == '\'') {
            std::size_t j = i + 1;
            while (j < n && text[j] != '\'') ++j;
            if (j >= n) syntax_error(i, "a closing quote", "end of input");
            t.kind = Tok::String;
            t.text = text.substr(i + 1, j - i - 1);
            i = j + 1;
        } else {
            switch (c) {
                case ',': t.kind = Tok::Comma; ++i; break;
                case '.': t.kind = Tok::Dot; ++i; break;
                case '(': t.kind = Tok::LParen; ++i; break;
                case ')': t.kind = Tok::RParen; ++i; break;
                case '*': t.kind = Tok::Star; ++i; break;
                case '+': t.kind = Tok::Plus; ++i; break;
                case '-': t.kind = Tok::Minus; ++i; break;
                case '/': t.kind = Tok::Slash; ++i; break;
                case '<':
                    if (i + 1 < n && text[i + 1] == '=') { t.kind = Tok::Le; i += 2; }
                    else if (i + 1 < n && text[i + 1] == '>') { t.kind = Tok::Ne; i += 2; }
                    else { t.kind = Tok::Lt; ++i; }
                    break;
                case '>':
                    if (i + 1 < n && text[i + 1] == '=') { t.kind = Tok::Ge; i += 2; }
                    else { t.kind = Tok::Gt; ++i; }
                    break;
                case '=':
                    if (i + 1 < n && text[i + 1] == '=') { t.kind = Tok::Eq; i += 2; }
                    else { t.kind = Tok::Eq; ++i; }
                    break;
                case '!':
                    if (i + 1 < n && text[i + 1] == '=') { t.kind = Tok::Ne; i += 2; }
                    else syntax_error(i, "'!='", "'!'");
                    break;
                default:
                    syntax_error(i, "a token", "'" + std::string(1, c) + "'");
            }
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.pos = n;
    out.push_back(end);
    return out;
}

// --------------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

    QueryAst parse() {
        QueryAst ast;
        expect_keyword("select");
        ast.select.push_back(parse_select_item());
        while (accept(Tok::Comma)) ast.select.push_back(parse_select_item());
        expect_keyword("from");
        ast.from = expect_ident("a dataset name");
        if (accept_keyword("join")) {
            JoinSpec join;
            join.dataset = expect_ident("a dataset name");
            expect_keyword("on");
            join.keys.push_back(parse_key_pair());
            while (accept_keyword("and")) join.keys.push_back(parse_key_pair());
            ast.join = std::move(join);
        }
        if (accept_keyword("where")) ast.where = parse_or();
        if (cur().kind != Tok::End) syntax_error(cur().pos, "end of query", describe(cur()));
        return ast;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t k = 1) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }

    static std::string describe(const Token& t) {
        switch (t.kind) {
            case Tok::End: return "end of input";
            case Tok::Ident: return "'" + t.text + "'";
            case Tok::Number: return "number " + t.text;
            case Tok::String: return "string '" + t.text + "'";
            default: return "a symbol";
        }
    }

    bool accept(Tok k) {
        if (cur().kind == k) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(Tok k, const std::string& what) {
        if (!accept(k)) syntax_error(cur().pos, what, describe(cur()));
    }

    bool is_keyword(const Token& t, const char* kw) const {
        return t.kind == Tok::Ident && lower(t.text) == kw;
    }

    bool accept_keyword(const char* kw) {
        if (is_keyword(cur(), kw)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_keyword(const char* kw) {
        if (!accept_keyword(kw)) syntax_error(cur().pos, std::string("'") + kw + "'", describe(cur()));
    }

    static bool is_reserved(const std::string& lowered) {
        static const char* kReserved[] = {"select", "from", "where", "join", "on",
                                          "and",    "or",   "not",   "in",   "as"};
        for (const char* kw : kReserved)
            if (lowered == kw) return true;
        return false;
    }

    std::string expect_ident(const std::string& what) {
        if (cur().kind != Tok::Ident || is_reserved(lower(cur().text)))
            syntax_error(cur().pos, what, describe(cur()));
        return toks_[pos_++].text;
    }

    std::string parse_column_ref() {
        std::string name = expect_ident("a column name");
        if (accept(Tok::Dot)) name += "." + expect_ident("a column name");
        return name;
    }

    std::pair<std::string, std::string> parse_key_pair() {
        std::string a = parse_column_ref();
        if (cur().kind != Tok::Eq) syntax_error(cur().pos, "'='", describe(cur()));
        ++pos_;
        std::string b = parse_column_ref();
        return {a, b};
    }

    // ---- select list

    static bool is_agg_name(const std::string& s, AggKind& kind) {
        static const std::unordered_map<std::string, AggKind> kMap = {
            {"count", AggKind::Count}, {"min", AggKind::Min},       {"max", AggKind::Max},
            {"mean", AggKind::Mean},   {"histogram", AggKind::Histogram},
        };
        auto it = kMap.find(s);
        if (it == kMap.end()) return false;
        kind = it->second;
        return true;
    }

    SelectItem parse_select_item() {
        SelectItem item;
        AggKind agg;
        if (cur().kind == Tok::Ident && peek().kind == Tok::LParen && is_agg_name(lower(cur().text), agg)) {
            item.agg = agg;
            ++pos_; // name
            expect(Tok::LParen, "'('");
            if (agg == AggKind::Count && accept(Tok::Star)) {
                expect(Tok::RParen, "')'");
            } else {
                item.expr = parse_expr();
                if (agg == AggKind::Histogram) {
                    expect(Tok::Comma, "','");
                    item.hist_lo = parse_signed_number();
                    expect(Tok::Comma, "','");
                    item.hist_hi = parse_signed_number();
                    expect(Tok::Comma, "','");
                    std::size_t at = cur().pos;
                    double bins = parse_signed_number();
                    if (bins < 1 || bins != std::floor(bins))
                        syntax_error(at, "a positive integer bin count", format_number(bins));
                    if (!(item.hist_lo < item.hist_hi))
                        syntax_error(at, "histogram bounds with lo < hi", "lo >= hi");
                    item.hist_bins = static_cast<std::int64_t>(bins);
                }
                expect(Tok::RParen, "')'");
            }
        } else {
            item.expr = parse_expr();
        }
        if (accept_keyword("as")) item.alias = expect_ident("an alias");
        return item;
    }

    double parse_signed_number() {
        bool neg = accept(Tok::Minus);
        if (cur().kind != Tok::Number) syntax_error(cur().pos, "a number", describe(cur()));
        double v = toks_[pos_++].number;
        return neg ? -v : v;
    }

    // ---- scalar expressions

    ExprPtr parse_expr() { return parse_add(); }

    ExprPtr parse_add() {
        ExprPtr e = parse_mul();
        for (;;) {
            BinaryOp op;
            if (accept(Tok::Plus)) op = BinaryOp::Add;
            else if (accept(Tok::Minus)) op = BinaryOp::Sub;
            else break;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Binary;
            node->bin_op = op;
            node->lhs = e;
            node->rhs = parse_mul();
            e = node;
        }
        return e;
    }

    ExprPtr parse_mul() {
        ExprPtr e = parse_unary();
        for (;;) {
            BinaryOp op;
            if (accept(Tok::Star)) op = BinaryOp::Mul;
            else if (accept(Tok::Slash)) op = BinaryOp::Div;
            else break;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Binary;
            node->bin_op = op;
            node->lhs = e;
            node->rhs = parse_unary();
            e = node;
        }
        return e;
    }

    ExprPtr parse_unary() {
        if (accept(Tok::Minus)) {
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Unary;
            node->func = UnaryFunc::Neg;
            node->arg = parse_unary();
            return node;
        }
        return parse_primary();
    }

    static bool is_func_name(const std::string& s, UnaryFunc& f) {
        if (s == "sqrt") f = UnaryFunc::Sqrt;
        else if (s == "exp") f = UnaryFunc::Exp;
        else if (s == "ln") f = UnaryFunc::Ln;
        else if (s == "abs") f = UnaryFunc::Abs;
        else return false;
        return true;
    }

    ExprPtr parse_primary() {
        if (cur().kind == Tok::Number) {
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Number;
            node->number = toks_[pos_++].number;
            return node;
        }
        if (cur().kind == Tok::String) {
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::String;
            node->text = toks_[pos_++].text;
            return node;
        }
        if (accept(Tok::LParen)) {
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (cur().kind == Tok::Ident) {
            UnaryFunc f;
            AggKind agg;
            if (peek().kind == Tok::LParen && is_func_name(lower(cur().text), f)) {
                ++pos_;
                expect(Tok::LParen, "'('");
                auto node = std::make_shared<Expr>();
                node->kind = Expr::Kind::Unary;
                node->func = f;
                node->arg = parse_expr();
                expect(Tok::RParen, "')'");
                return node;
            }
            if (peek().kind == Tok::LParen && is_agg_name(lower(cur().text), agg))
                syntax_error(cur().pos, "a scalar expression", "aggregate '" + cur().text + "'");
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Column;
            node->column = parse_column_ref();
            return node;
        }
        syntax_error(cur().pos, "an expression", describe(cur()));
    }

    // ---- predicates

    Pred parse_or() {
        std::vector<Pred> parts;
        parts.push_back(parse_and());
        while (accept_keyword("or")) parts.push_back(parse_and());
        if (parts.size() == 1) return std::move(parts[0]);
        return Pred::make_or(std::move(parts));
    }

    Pred parse_and() {
        std::vector<Pred> parts;
        parts.push_back(parse_not());
        while (accept_keyword("and")) parts.push_back(parse_not());
        if (parts.size() == 1) return std::move(parts[0]);
        return Pred::make_and(std::move(parts));
    }

    Pred parse_not() {
        if (accept_keyword("not")) return Pred::make_not(parse_not());
        if (accept(Tok::LParen)) {
            Pred p = parse_or();
            expect(Tok::RParen, "')'");
            return p;
        }
        return parse_atom();
    }

    Literal parse_literal() {
        Literal lit;
        if (cur().kind == Tok::String) {
            lit.is_text = true;
            lit.text = toks_[pos_++].text;
        } else {
            lit.number = parse_signed_number();
        }
        return lit;
    }

    Pred parse_atom() {
        Atom atom;
        atom.column = parse_column_ref();
        if (accept_keyword("not")) {
            expect_keyword("in");
            atom.op = CmpOp::NotIn;
        } else if (accept_keyword("in")) {
            atom.op = CmpOp::In;
        } else {
            switch (cur().kind) {
                case Tok::Lt: atom.op = CmpOp::Lt; break;
                case Tok::Le: atom.op = CmpOp::Le; break;
                case Tok::Gt: atom.op = CmpOp::Gt; break;
                case Tok::Ge: atom.op = CmpOp::Ge; break;
                case Tok::Eq: atom.op = CmpOp::Eq; break;
                case Tok::Ne: atom.op = CmpOp::Ne; break;
                default: syntax_error(cur().pos, "a comparison operator", describe(cur()));
            }
            ++pos_;
            if (cur().kind == Tok::Ident) {
                atom.rhs_column = parse_column_ref();
            } else {
                atom.values.push_back(parse_literal());
            }
            return Pred::make_atom(std::move(atom));
        }
        expect(Tok::LParen, "'('");
        atom.values.push_back(parse_literal());
        while (accept(Tok::Comma)) atom.values.push_back(parse_literal());
        expect(Tok::RParen, "')'");
        return Pred::make_atom(std::move(atom));
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace

QueryAst parse_query(const std::string& text) {
    return Parser(text).parse();
}

// -------------------------------------------------------------------- printer

namespace {

int expr_level(const Expr& e) {
    if (e.kind != Expr::Kind::Binary) return 3;
    return (e.bin_op == BinaryOp::Add || e.bin_op == BinaryOp::Sub) ? 1 : 2;
}

void print_expr_rec(const Expr& e, std::string& out, int parent_level) {
    int level = expr_level(e);
    bool parens = level < parent_level;
    if (parens) out += "(";
    switch (e.kind) {
        case Expr::Kind::Column: out += e.column; break;
        case Expr::Kind::Number: out += format_number(e.number); break;
        case Expr::Kind::String: out += "'" + e.text + "'"; break;
        case Expr::Kind::Binary: {
            const char* op = e.bin_op == BinaryOp::Add   ? " + "
                             : e.bin_op == BinaryOp::Sub ? " - "
                             : e.bin_op == BinaryOp::Mul ? " * "
                                                         : " / ";
            print_expr_rec(*e.lhs, out, level);
            out += op;
            // right operand of - and / needs parens at the same level
            print_expr_rec(*e.rhs, out, level + (e.bin_op == BinaryOp::Sub || e.bin_op == BinaryOp::Div ? 1 : 0));
            break;
        }
        case Expr::Kind::Unary:
            if (e.func == UnaryFunc::Neg) {
                out += "-";
                print_expr_rec(*e.arg, out, 3);
            } else {
                out += e.func == UnaryFunc::Sqrt ? "sqrt" : e.func == UnaryFunc::Exp ? "exp" : e.func == UnaryFunc::Ln ? "ln" : "abs";
                out += "(";
                print_expr_rec(*e.arg, out, 0);
                out += ")";
            }
            break;
    }
    if (parens) out += ")";
}

std::string print_literal(const Literal& lit) {
    return lit.is_text ? "'" + lit.text + "'" : format_number(lit.number);
}

std::string print_atom(const Atom& a) {
    std::string out = a.column;
    if (a.op == CmpOp::In || a.op == CmpOp::NotIn) {
        out += a.op == CmpOp::In ? " IN (" : " NOT IN (";
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            if (i > 0) out += ", ";
            out += print_literal(a.values[i]);
        }
        out += ")";
        return out;
    }
    out += " ";
    out += cmp_op_text(a.op);
    out += " ";
    out += a.rhs_column ? *a.rhs_column : print_literal(a.values.at(0));
    return out;
}

int pred_level(const Pred& p) {
    switch (p.kind) {
        case Pred::Kind::Or: return 1;
        case Pred::Kind::And: return 2;
        case Pred::Kind::Not: return 3;
        case Pred::Kind::Atom: return 4;
    }
    return 4;
}

void print_pred_rec(const Pred& p, std::string& out, int parent_level) {
    int level = pred_level(p);
    bool parens = level < parent_level;
    if (parens) out += "(";
    switch (p.kind) {
        case Pred::Kind::Atom: out += print_atom(p.atom); break;
        case Pred::Kind::Not:
            out += "NOT ";
            print_pred_rec(p.children[0], out, 4);
            break;
        case Pred::Kind::And:
        case Pred::Kind::Or: {
            const char* sep = p.kind == Pred::Kind::And ? " AND " : " OR ";
            for (std::size_t i = 0; i < p.children.size(); ++i) {
                if (i > 0) out += sep;
                print_pred_rec(p.children[i], out, level + (i > 0 && p.kind == Pred::Kind::Or ? 0 : 0));
            }
            break;
        }
    }
    if (parens) out += ")";
}

} // namespace

std::string print_expr(const Expr& e) {
    std::string out;
    print_expr_rec(e, out, 0);
    return out;
}

std::string print_pred(const Pred& p) {
    std::string out;
    print_pred_rec(p, out, 0);
    return out;
}

namespace {

std::string print_select_item(const SelectItem& item) {
    std::string out;
    switch (item.agg) {
        case AggKind::None: out = print_expr(*item.expr); break;
        case AggKind::Count: out = item.expr ? "count(" + print_expr(*item.expr) + ")" : "count(*)"; break;
        case AggKind::Min: out = "min(" + print_expr(*item.expr) + ")"; break;
        case AggKind::Max: out = "max(" + print_expr(*item.expr) + ")"; break;
        case AggKind::Mean: out = "mean(" + print_expr(*item.expr) + ")"; break;
        case AggKind::Histogram:
            out = "histogram(" + print_expr(*item.expr) + ", " + format_number(item.hist_lo) + ", " +
                  format_number(item.hist_hi) + ", " + format_int(item.hist_bins) + ")";
            break;
    }
    return out;
}

} // namespace

std::string print_query(const QueryAst& ast) {
    std::string out = "SELECT ";
    for (std::size_t i = 0; i < ast.select.size(); ++i) {
        if (i > 0) out += ", ";
        const SelectItem& item = ast.select[i];
        out += print_select_item(item);
        if (!item.alias.empty()) out += " AS " + item.alias;
    }
    out += " FROM " + ast.from;
    if (ast.join) {
        out += " JOIN " + ast.join->dataset + " ON ";
        for (std::size_t i = 0; i < ast.join->keys.size(); ++i) {
            if (i > 0) out += " AND ";
            out += ast.join->keys[i].first + " = " + ast.join->keys[i].second;
        }
    }
    if (ast.where) out += " WHERE " + print_pred(*ast.where);
    return out;
}

// --------------------------------------------------------------------- binder

namespace {

struct Resolver {
    const DatasetDescriptor* sides[2] = {nullptr, nullptr};

    struct Hit {
        ColumnRef ref;
        const RowColumn* column = nullptr;
    };

    Hit resolve(const std::string& name) const {
        std::string ds, col = name;
        if (auto dot = name.find('.'); dot != std::string::npos) {
            ds = name.substr(0, dot);
            col = name.substr(dot + 1);
        }
        Hit hit;
        int found = 0;
        for (int side = 0; side < 2; ++side) {
            if (!sides[side]) continue;
            if (!ds.empty() && sides[side]->name != ds) continue;
            int idx = sides[side]->row_schema.find(col);
            if (idx >= 0) {
                ++found;
                hit.ref = {side, idx};
                hit.column = &sides[side]->row_schema.columns[static_cast<std::size_t>(idx)];
            }
        }
        if (found == 0) fail(Errc::UnknownColumn, "no column '" + name + "'");
        if (found > 1) fail(Errc::UnknownColumn, "column '" + name + "' is ambiguous; qualify it with the dataset name");
        return hit;
    }

    const std::optional<TimeUnits>& dim_units(const Hit& hit) const {
        static const std::optional<TimeUnits> kNone;
        const DatasetDescriptor& ds = *sides[hit.ref.side];
        if (hit.column->dim_index >= 0 && ds.kind == DatasetKind::Grid)
            return ds.schema.dims[static_cast<std::size_t>(hit.column->dim_index)].time_units;
        return kNone;
    }
};

double bind_literal(const Literal& lit, const RowColumn& col, const std::string& col_name) {
    if (col.type == ColumnType::Timestamp) {
        if (!lit.is_text)
            fail(Errc::TypeMismatch, "column '" + col_name + "' is a timestamp; compare it with a quoted timestamp literal");
        auto ts = parse_timestamp(lit.text);
        if (!ts) fail(Errc::TypeMismatch, "'" + lit.text + "' is not a 'YYYY-MM-DD HH:MM:SS' timestamp");
        return static_cast<double>(*ts);
    }
    if (lit.is_text)
        fail(Errc::TypeMismatch, "column '" + col_name + "' is numeric; '" + lit.text + "' is a string literal");
    return lit.number;
}

BoundAtom bind_atom(const Atom& atom, const Resolver& res) {
    auto hit = res.resolve(atom.column);
    const RowColumn& col = *hit.column;
    if (col.role == ColumnRole::File)
        fail(Errc::TypeMismatch, "the file column is read-only and cannot be filtered");
    if (col.type == ColumnType::Text)
        fail(Errc::TypeMismatch, "string predicates are not supported (column '" + atom.column + "')");
    if (atom.rhs_column)
        fail(Errc::TypeMismatch, "column-to-column comparisons are not supported ('" + atom.column + "' vs '" +
                                     *atom.rhs_column + "')");

    BoundAtom out;
    out.ref = hit.ref;
    out.column_name = atom.column;
    out.role = col.role;
    out.type = col.type;
    out.dim_index = col.dim_index;
    out.positional = col.role == ColumnRole::DimPosition;
    out.op = atom.op;
    out.values.reserve(atom.values.size());
    for (const Literal& lit : atom.values) out.values.push_back(bind_literal(lit, col, atom.column));
    return out;
}

BoundPred bind_pred(const Pred& p, const Resolver& res) {
    BoundPred out;
    switch (p.kind) {
        case Pred::Kind::Atom:
            out.kind = BoundPred::Kind::Atom;
            out.atom = bind_atom(p.atom, res);
            break;
        case Pred::Kind::Not:
            out.kind = BoundPred::Kind::Not;
            out.children.push_back(bind_pred(p.children[0], res));
            break;
        case Pred::Kind::And:
        case Pred::Kind::Or:
            out.kind = p.kind == Pred::Kind::And ? BoundPred::Kind::And : BoundPred::Kind::Or;
            for (const Pred& c : p.children) out.children.push_back(bind_pred(c, res));
            break;
    }
    return out;
}

// text columns are only selectable as bare references (allow_text holds for
// the top of a select item), never inside arithmetic
BoundExprPtr bind_expr(const Expr& e, const Resolver& res, bool allow_text = false) {
    auto out = std::make_shared<BoundExpr>();
    switch (e.kind) {
        case Expr::Kind::Column: {
            auto hit = res.resolve(e.column);
            if (hit.column->type == ColumnType::Text && !allow_text)
                fail(Errc::TypeMismatch, "text column '" + e.column + "' cannot appear in an expression");
            out->kind = BoundExpr::Kind::Column;
            out->ref = hit.ref;
            out->col_type = hit.column->type;
            out->column_name = e.column;
            break;
        }
        case Expr::Kind::Number:
            out->kind = BoundExpr::Kind::Number;
            out->number = e.number;
            break;
        case Expr::Kind::String: {
            auto ts = parse_timestamp(e.text);
            if (!ts) fail(Errc::TypeMismatch, "string literal '" + e.text + "' is not a timestamp");
            out->kind = BoundExpr::Kind::Number;
            out->number = static_cast<double>(*ts);
            break;
        }
        case Expr::Kind::Binary:
            out->kind = BoundExpr::Kind::Binary;
            out->bin_op = e.bin_op;
            out->lhs = bind_expr(*e.lhs, res);
            out->rhs = bind_expr(*e.rhs, res);
            break;
        case Expr::Kind::Unary:
            out->kind = BoundExpr::Kind::Unary;
            out->func = e.func;
            out->arg = bind_expr(*e.arg, res);
            break;
    }
    return out;
}

} // namespace

BoundQuery bind(const QueryAst& ast, const Catalog& catalog) {
    BoundQuery q;
    q.ast = ast;
    q.from = catalog.get(ast.from);
    Resolver res;
    res.sides[0] = &q.from;
    if (ast.join) {
        q.join_dataset = catalog.get(ast.join->dataset);
        res.sides[1] = &*q.join_dataset;
        for (const auto& [a, b] : ast.join->keys) {
            auto ha = res.resolve(a);
            auto hb = res.resolve(b);
            if (ha.ref.side == hb.ref.side)
                fail(Errc::TypeMismatch, "join key '" + a + " = " + b + "' must pair the two datasets");
            if (ha.column->type == ColumnType::Text || hb.column->type == ColumnType::Text)
                fail(Errc::TypeMismatch, "text columns cannot be join keys");
            if (ha.ref.side == 1) std::swap(ha, hb);
            q.join_keys.emplace_back(ha.ref, hb.ref);
        }
    }

    int aggregates = 0, scalars = 0, histograms = 0;
    for (const SelectItem& item : ast.select) {
        BoundSelectItem bi;
        bi.agg = item.agg;
        bi.hist_lo = item.hist_lo;
        bi.hist_hi = item.hist_hi;
        bi.hist_bins = item.hist_bins;
        bool allow_text = item.agg == AggKind::None || item.agg == AggKind::Count;
        if (item.expr) bi.expr = bind_expr(*item.expr, res, allow_text);
        bi.name = item.alias.empty() ? print_select_item(item) : item.alias;
        if (item.agg == AggKind::None) ++scalars;
        else ++aggregates;
        if (item.agg == AggKind::Histogram) ++histograms;
        q.select.push_back(std::move(bi));
    }
    if (aggregates > 0 && scalars > 0)
        fail(Errc::TypeMismatch, "the select list cannot mix aggregates and plain expressions");
    if (histograms > 0 && ast.select.size() != 1)
        fail(Errc::TypeMismatch, "histogram must be the only item in the select list");
    q.aggregate = aggregates > 0;

    if (ast.where) q.where = bind_pred(*ast.where, res);
    return q;
}

std::string print_bound_atom(const BoundAtom& atom) {
    auto fmt = [&](double v) {
        if (atom.type == ColumnType::Timestamp) return "'" + format_timestamp(static_cast<std::int64_t>(v)) + "'";
        return format_number(v);
    };
    std::string out = atom.column_name;
    if (atom.op == CmpOp::In || atom.op == CmpOp::NotIn) {
        out += atom.op == CmpOp::In ? " IN (" : " NOT IN (";
        for (std::size_t i = 0; i < atom.values.size(); ++i) {
            if (i > 0) out += ", ";
            out += fmt(atom.values[i]);
        }
        return out + ")";
    }
    return out + " " + cmp_op_text(atom.op) + " " + fmt(atom.values.at(0));
}

} // namespace gridlight
