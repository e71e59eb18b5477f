#include "route/sql_parser.hpp"

#include <algorithm>
#include <iterator>
#include <optional>

#include "route/identifier.hpp"

namespace route {

namespace {

constexpr std::string_view kReserved[] = {
    "ALL",     "AND",     "AS",     "ASC",       "BETWEEN", "BY",      "CASE",    "CAST",   "COLLATE",
    "CROSS",   "DESC",    "DISTINCT", "ELSE",    "END",     "ESCAPE",  "EXCEPT",  "EXISTS", "FROM",
    "FULL",    "GLOB",    "GROUP",  "HAVING",    "IN",      "INDEXED", "INNER",   "INTERSECT", "IS",
    "ISNULL",  "JOIN",    "LEFT",   "LIKE",      "LIMIT",   "MATCH",   "NATURAL", "NOT",    "NOTNULL",
    "NULL",    "OFFSET",  "ON",     "OR",        "ORDER",   "OUTER",   "REGEXP",  "RIGHT",  "SELECT",
    "THEN",    "UNION",   "USING",  "VALUES",    "WHEN",    "WHERE"};

bool is_reserved(const Token& t) {
    if (t.kind != TokenKind::Word) return false;
    if (t.is("WINDOW") || t.is("WITH")) return true;
    return std::any_of(std::begin(kReserved), std::end(kReserved), [&](std::string_view k) { return t.is(k); });
}

struct CteEntry {
    std::string name;
    int scope = -1;
};

class Parser {
  public:
    explicit Parser(ParsedQuery& out) : out_(out), toks_(out.tokens) {}

    void parse() {
        if (toks_.empty()) throw SqlParseError("empty statement", 0);
        if (!starts_query(pos_)) throw SqlParseError("expected SELECT, WITH or VALUES", toks_[0].offset);
        out_.root_scope = parse_statement(-1, true);
        while (pos_ < toks_.size() && toks_[pos_].kind == TokenKind::Semicolon) ++pos_;
        if (pos_ < toks_.size()) throw SqlParseError("unexpected '" + toks_[pos_].text + "'", toks_[pos_].offset);
    }

  private:
    ParsedQuery& out_;
    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;
    int scope_ = -1;
    Clause clause_ = Clause::Other;
    std::vector<std::vector<CteEntry>> ctes_;

    // ---- token helpers -------------------------------------------------------

    const Token* peek(std::size_t ahead = 0) const {
        return pos_ + ahead < toks_.size() ? &toks_[pos_ + ahead] : nullptr;
    }
    bool at_kw(std::string_view kw, std::size_t ahead = 0) const {
        const Token* t = peek(ahead);
        return t && t->is(kw);
    }
    bool at_kind(TokenKind k, std::size_t ahead = 0) const {
        const Token* t = peek(ahead);
        return t && t->kind == k;
    }
    bool at_op(std::string_view op) const {
        const Token* t = peek();
        return t && t->is_op(op);
    }
    bool accept_kw(std::string_view kw) {
        if (at_kw(kw)) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool accept_kind(TokenKind k) {
        if (at_kind(k)) {
            ++pos_;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        if (pos_ < toks_.size()) {
            throw SqlParseError(what + ", found '" + toks_[pos_].text + "'", toks_[pos_].offset);
        }
        throw SqlParseError(what + ", found end of input", out_.text.size());
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail("expected " + std::string(kw));
    }
    void expect_kind(TokenKind k, const char* what) {
        if (!accept_kind(k)) fail(std::string("expected ") + what);
    }
    bool starts_query(std::size_t at) const {
        if (at >= toks_.size()) return false;
        const Token& t = toks_[at];
        return t.is("SELECT") || t.is("WITH") || t.is("VALUES");
    }
    bool at_identifier(std::size_t ahead = 0) const {
        const Token* t = peek(ahead);
        if (!t) return false;
        if (t->kind == TokenKind::QuotedIdent) return true;
        return t->kind == TokenKind::Word && !is_reserved(*t);
    }
    std::size_t expect_identifier() {
        if (!at_identifier()) fail("expected identifier");
        return pos_++;
    }

    Scope& scope() { return out_.scopes[static_cast<std::size_t>(scope_)]; }

    // ---- statements ----------------------------------------------------------

    int parse_statement(int parent, bool outermost) {
        bool pushed = false;
        if (accept_kw("WITH")) {
            accept_kw("RECURSIVE");
            ctes_.emplace_back();
            pushed = true;
            do {
                std::size_t name_tok = expect_identifier();
                std::vector<std::string> columns;
                if (accept_kind(TokenKind::LParen)) {
                    do {
                        columns.push_back(toks_[expect_identifier()].text);
                    } while (accept_kind(TokenKind::Comma));
                    expect_kind(TokenKind::RParen, "')'");
                }
                expect_kw("AS");
                if (accept_kw("NOT")) expect_kw("MATERIALIZED");
                else accept_kw("MATERIALIZED");
                expect_kind(TokenKind::LParen, "'('");
                ctes_.back().push_back(CteEntry{toks_[name_tok].text, -1});
                std::size_t slot = ctes_.back().size() - 1;
                int body = parse_statement(parent, false);
                expect_kind(TokenKind::RParen, "')'");
                ctes_.back()[slot].scope = body;
                if (!columns.empty()) out_.scopes[static_cast<std::size_t>(body)].output_names = columns;
            } while (accept_kind(TokenKind::Comma));
        }

        int first = parse_compound(parent);

        int saved_scope = scope_;
        Clause saved_clause = clause_;
        scope_ = first;
        if (at_kw("ORDER") && at_kw("BY", 1)) {
            pos_ += 2;
            if (outermost) out_.outer_order_by = true;
            clause_ = Clause::OrderBy;
            parse_ordering_terms();
        }
        if (accept_kw("LIMIT")) {
            clause_ = Clause::Limit;
            parse_expr();
            if (accept_kw("OFFSET") || accept_kind(TokenKind::Comma)) parse_expr();
        }
        scope_ = saved_scope;
        clause_ = saved_clause;

        if (pushed) ctes_.pop_back();
        return first;
    }

    int parse_compound(int parent) {
        Compound compound;
        std::size_t begin = pos_;
        int first = parse_core(parent);
        compound.cores.emplace_back(begin, pos_);
        while (at_kw("UNION") || at_kw("INTERSECT") || at_kw("EXCEPT")) {
            std::size_t op_begin = pos_;
            bool is_union = at_kw("UNION");
            ++pos_;
            if (is_union) accept_kw("ALL");
            compound.operators.emplace_back(op_begin, pos_);
            begin = pos_;
            parse_core(parent);
            compound.cores.emplace_back(begin, pos_);
        }
        if (compound.cores.size() >= 2) out_.compounds.push_back(std::move(compound));
        return first;
    }

    int new_scope(int parent) {
        out_.scopes.push_back(Scope{});
        out_.scopes.back().parent = parent;
        out_.scopes.back().begin_token = pos_;
        return static_cast<int>(out_.scopes.size() - 1);
    }

    int parse_core(int parent) {
        if (at_kind(TokenKind::LParen) && starts_query(pos_ + 1)) {
            ++pos_;
            int s = parse_statement(parent, false);
            expect_kind(TokenKind::RParen, "')'");
            return s;
        }

        int saved_scope = scope_;
        Clause saved_clause = clause_;
        int id = new_scope(parent);
        scope_ = id;

        if (accept_kw("VALUES")) {
            clause_ = Clause::Values;
            do {
                expect_kind(TokenKind::LParen, "'('");
                parse_expr_list();
                expect_kind(TokenKind::RParen, "')'");
            } while (accept_kind(TokenKind::Comma));
        } else {
            expect_kw("SELECT");
            if (!accept_kw("DISTINCT")) accept_kw("ALL");
            clause_ = Clause::Select;
            parse_result_columns();
            if (accept_kw("FROM")) {
                clause_ = Clause::Join;
                parse_sources();
            }
            if (accept_kw("WHERE")) {
                clause_ = Clause::Where;
                parse_expr();
            }
            if (at_kw("GROUP") && at_kw("BY", 1)) {
                pos_ += 2;
                clause_ = Clause::GroupBy;
                parse_expr_list();
            }
            if (accept_kw("HAVING")) {
                clause_ = Clause::Having;
                parse_expr();
            }
            if (accept_kw("WINDOW")) {
                clause_ = Clause::Window;
                do {
                    expect_identifier();
                    expect_kw("AS");
                    parse_window_definition();
                } while (accept_kind(TokenKind::Comma));
            }
        }
        out_.scopes[static_cast<std::size_t>(id)].end_token = pos_;
        scope_ = saved_scope;
        clause_ = saved_clause;
        return id;
    }

    void parse_result_columns() {
        do {
            if (at_op("*")) {
                add_star({}, kNoToken, pos_);
                ++pos_;
                continue;
            }
            if (at_identifier() && at_kind(TokenKind::Dot, 1) && peek(2) && peek(2)->is_op("*")) {
                add_star(toks_[pos_].text, pos_, pos_ + 2);
                pos_ += 3;
                continue;
            }
            std::size_t start = pos_;
            std::size_t refs_before = scope().columns.size();
            parse_expr();
            std::optional<std::string> alias;
            if (accept_kw("AS")) {
                if (!at_identifier() && !at_kind(TokenKind::String)) fail("expected alias");
                alias = toks_[pos_++].text;
            } else if (at_identifier() || at_kind(TokenKind::String)) {
                alias = toks_[pos_++].text;
            }
            if (alias) {
                scope().output_names.push_back(*alias);
                scope().aliases.push_back(*alias);
            } else if (scope().columns.size() == refs_before + 1 && !scope().columns.back().star &&
                       scope().columns.back().token + 1 == pos_ && start + 1 <= pos_) {
                scope().output_names.push_back(scope().columns.back().name);
            } else {
                std::string text;
                for (std::size_t i = start; i < pos_; ++i) text += toks_[i].text;
                scope().output_names.push_back(text);
            }
        } while (accept_kind(TokenKind::Comma));
    }

    void add_star(std::string qualifier, std::size_t qualifier_token, std::size_t star_token) {
        ColumnRef ref;
        ref.qualifier = std::move(qualifier);
        ref.qualifier_token = qualifier_token;
        ref.name = "*";
        ref.token = star_token;
        ref.clause = clause_;
        ref.star = true;
        scope().columns.push_back(std::move(ref));
        scope().output_has_star = true;
    }

    // ---- FROM ------------------------------------------------------------------

    bool at_join_operator() const {
        std::size_t i = 0;
        if (at_kw("NATURAL", i)) ++i;
        if (at_kw("LEFT", i) || at_kw("RIGHT", i) || at_kw("FULL", i)) {
            ++i;
            if (at_kw("OUTER", i)) ++i;
        } else if (at_kw("INNER", i) || at_kw("CROSS", i)) {
            ++i;
        }
        return at_kw("JOIN", i);
    }

    void parse_sources() {
        parse_single_source(false, false);
        for (;;) {
            if (accept_kind(TokenKind::Comma)) {
                parse_single_source(true, false);
            } else if (at_join_operator()) {
                while (!accept_kw("JOIN")) ++pos_;
                parse_single_source(true, true);
                if (accept_kw("ON")) {
                    Clause saved = clause_;
                    clause_ = Clause::Join;
                    parse_expr();
                    clause_ = saved;
                } else if (accept_kw("USING")) {
                    expect_kind(TokenKind::LParen, "'('");
                    std::vector<std::string> cols;
                    do {
                        cols.push_back(toks_[expect_identifier()].text);
                    } while (accept_kind(TokenKind::Comma));
                    expect_kind(TokenKind::RParen, "')'");
                    scope().sources.back().using_columns = std::move(cols);
                }
            } else {
                break;
            }
        }
    }

    std::string parse_optional_alias() {
        if (accept_kw("AS")) {
            if (!at_identifier() && !at_kind(TokenKind::String)) fail("expected alias");
            return toks_[pos_++].text;
        }
        if (at_identifier()) return toks_[pos_++].text;
        return {};
    }

    void parse_single_source(bool joined, bool via_join) {
        SourceRef src;
        src.joined = joined;
        src.via_join = via_join;
        if (at_kind(TokenKind::LParen)) {
            if (starts_query(pos_ + 1)) {
                ++pos_;
                int parent = scope().parent;
                int saved_scope = scope_;
                Clause saved_clause = clause_;
                src.derived_scope = parse_statement(parent, false);
                scope_ = saved_scope;
                clause_ = saved_clause;
                expect_kind(TokenKind::RParen, "')'");
                src.alias = parse_optional_alias();
                scope().sources.push_back(std::move(src));
                return;
            }
            ++pos_;
            parse_sources();
            expect_kind(TokenKind::RParen, "')'");
            parse_optional_alias();
            return;
        }

        std::size_t name_tok = expect_identifier();
        bool schema_qualified = false;
        if (at_kind(TokenKind::Dot) && at_identifier(1)) {
            ++pos_;
            name_tok = expect_identifier();
            schema_qualified = true;
        }
        src.name = toks_[name_tok].text;
        src.name_token = name_tok;
        if (at_kind(TokenKind::LParen)) {
            ++pos_;
            if (!at_kind(TokenKind::RParen)) parse_expr_list();
            expect_kind(TokenKind::RParen, "')'");
            src.is_function = true;
        }
        src.alias = parse_optional_alias();
        if (accept_kw("INDEXED")) {
            expect_kw("BY");
            expect_identifier();
        } else if (at_kw("NOT") && at_kw("INDEXED", 1)) {
            pos_ += 2;
        }
        if (!schema_qualified && !src.is_function) {
            for (auto frame = ctes_.rbegin(); frame != ctes_.rend() && !src.is_cte; ++frame) {
                for (const auto& cte : *frame) {
                    if (ident_equal(cte.name, src.name)) {
                        src.is_cte = true;
                        src.derived_scope = cte.scope;
                        break;
                    }
                }
            }
        }
        scope().sources.push_back(std::move(src));
    }

    // ---- ORDER BY / windows --------------------------------------------------------

    void parse_ordering_terms() {
        do {
            parse_expr();
            if (!accept_kw("ASC")) accept_kw("DESC");
            if (accept_kw("NULLS")) {
                if (!accept_kw("FIRST")) expect_kw("LAST");
            }
        } while (accept_kind(TokenKind::Comma));
    }

    void parse_window_definition() {
        expect_kind(TokenKind::LParen, "'('");
        if (at_identifier() && !at_kw("PARTITION") && !at_kw("ORDER") && !at_kw("RANGE") && !at_kw("ROWS") &&
            !at_kw("GROUPS")) {
            ++pos_;
        }
        Clause saved = clause_;
        clause_ = Clause::Window;
        if (at_kw("PARTITION") && at_kw("BY", 1)) {
            pos_ += 2;
            parse_expr_list();
        }
        if (at_kw("ORDER") && at_kw("BY", 1)) {
            pos_ += 2;
            parse_ordering_terms();
        }
        clause_ = saved;
        int depth = 0;
        while (pos_ < toks_.size()) {
            if (toks_[pos_].kind == TokenKind::LParen) ++depth;
            if (toks_[pos_].kind == TokenKind::RParen) {
                if (depth == 0) break;
                --depth;
            }
            ++pos_;
        }
        expect_kind(TokenKind::RParen, "')'");
    }

    // ---- expressions ---------------------------------------------------------------

    void parse_expr_list() {
        do {
            parse_expr();
        } while (accept_kind(TokenKind::Comma));
    }

    void parse_expr() { parse_or(); }

    void parse_or() {
        parse_and();
        while (accept_kw("OR")) parse_and();
    }

    void parse_and() {
        parse_not();
        while (accept_kw("AND")) parse_not();
    }

    void parse_not() {
        if (accept_kw("NOT")) {
            parse_not();
            return;
        }
        parse_comparison();
    }

    void parse_comparison() {
        parse_relational();
        for (;;) {
            if (accept_kw("IS")) {
                accept_kw("NOT");
                if (accept_kw("DISTINCT")) expect_kw("FROM");
                parse_relational();
                continue;
            }
            if (accept_kw("ISNULL") || accept_kw("NOTNULL")) continue;
            bool negated = false;
            if (at_kw("NOT") && (at_kw("IN", 1) || at_kw("LIKE", 1) || at_kw("GLOB", 1) || at_kw("REGEXP", 1) ||
                                 at_kw("MATCH", 1) || at_kw("BETWEEN", 1) || at_kw("NULL", 1))) {
                ++pos_;
                negated = true;
            }
            if (negated && accept_kw("NULL")) continue;
            if (accept_kw("IN")) {
                parse_in_rhs();
                continue;
            }
            if (accept_kw("LIKE") || accept_kw("GLOB") || accept_kw("REGEXP") || accept_kw("MATCH")) {
                parse_relational();
                if (accept_kw("ESCAPE")) parse_relational();
                continue;
            }
            if (accept_kw("BETWEEN")) {
                parse_relational();
                expect_kw("AND");
                parse_relational();
                continue;
            }
            if (at_op("=") || at_op("==") || at_op("!=") || at_op("<>")) {
                ++pos_;
                parse_relational();
                continue;
            }
            if (negated) fail("expected IN, LIKE, BETWEEN or NULL after NOT");
            break;
        }
    }

    void parse_in_rhs() {
        if (accept_kind(TokenKind::LParen)) {
            if (at_kind(TokenKind::RParen)) {
                ++pos_;
                return;
            }
            if (starts_query(pos_)) {
                parse_subquery_body();
            } else {
                parse_expr_list();
            }
            expect_kind(TokenKind::RParen, "')'");
            return;
        }
        expect_identifier();
        if (accept_kind(TokenKind::Dot)) expect_identifier();
        if (accept_kind(TokenKind::LParen)) {
            if (!at_kind(TokenKind::RParen)) parse_expr_list();
            expect_kind(TokenKind::RParen, "')'");
        }
    }

    void parse_relational() {
        parse_bitwise();
        while (at_op("<") || at_op("<=") || at_op(">") || at_op(">=")) {
            ++pos_;
            parse_bitwise();
        }
    }

    void parse_bitwise() {
        parse_additive();
        while (at_op("&") || at_op("|") || at_op("<<") || at_op(">>")) {
            ++pos_;
            parse_additive();
        }
    }

    void parse_additive() {
        parse_multiplicative();
        while (at_op("+") || at_op("-")) {
            ++pos_;
            parse_multiplicative();
        }
    }

    void parse_multiplicative() {
        parse_concat();
        while (at_op("*") || at_op("/") || at_op("%")) {
            ++pos_;
            parse_concat();
        }
    }

    void parse_concat() {
        parse_unary();
        while (at_op("||") || at_op("->") || at_op("->>")) {
            ++pos_;
            parse_unary();
        }
    }

    void parse_unary() {
        if (at_op("-") || at_op("+") || at_op("~")) {
            ++pos_;
            parse_unary();
            return;
        }
        parse_primary();
        while (accept_kw("COLLATE")) {
            if (!at_identifier() && !at_kind(TokenKind::String)) fail("expected collation name");
            ++pos_;
        }
    }

    void parse_subquery_body() {
        int saved_scope = scope_;
        Clause saved_clause = clause_;
        parse_statement(scope_, false);
        scope_ = saved_scope;
        clause_ = saved_clause;
    }

    void parse_primary() {
        const Token* t = peek();
        if (!t) fail("expected expression");
        switch (t->kind) {
            case TokenKind::Number:
            case TokenKind::String:
            case TokenKind::Blob:
            case TokenKind::Param:
                ++pos_;
                return;
            case TokenKind::LParen:
                ++pos_;
                if (starts_query(pos_)) {
                    parse_subquery_body();
                } else {
                    parse_expr_list();
                }
                expect_kind(TokenKind::RParen, "')'");
                return;
            case TokenKind::QuotedIdent:
            case TokenKind::Word:
                break;
            default:
                fail("expected expression");
        }

        if (t->kind == TokenKind::Word) {
            if (t->is("NULL") || t->is("TRUE") || t->is("FALSE") || t->is("CURRENT_DATE") ||
                t->is("CURRENT_TIME") || t->is("CURRENT_TIMESTAMP")) {
                ++pos_;
                return;
            }
            if (t->is("CASE")) {
                ++pos_;
                if (!at_kw("WHEN")) parse_expr();
                if (!at_kw("WHEN")) fail("expected WHEN");
                while (accept_kw("WHEN")) {
                    parse_expr();
                    expect_kw("THEN");
                    parse_expr();
                }
                if (accept_kw("ELSE")) parse_expr();
                expect_kw("END");
                return;
            }
            if (t->is("CAST")) {
                ++pos_;
                expect_kind(TokenKind::LParen, "'('");
                parse_expr();
                expect_kw("AS");
                while (at_kind(TokenKind::Word) && !at_kind(TokenKind::RParen)) ++pos_;
                if (accept_kind(TokenKind::LParen)) {
                    expect_kind(TokenKind::Number, "number");
                    if (accept_kind(TokenKind::Comma)) expect_kind(TokenKind::Number, "number");
                    expect_kind(TokenKind::RParen, "')'");
                }
                expect_kind(TokenKind::RParen, "')'");
                return;
            }
            if (t->is("EXISTS")) {
                ++pos_;
                expect_kind(TokenKind::LParen, "'('");
                if (!starts_query(pos_)) fail("expected subquery");
                parse_subquery_body();
                expect_kind(TokenKind::RParen, "')'");
                return;
            }
            if (t->is("NOT")) {
                ++pos_;
                parse_unary();
                return;
            }
            if (t->is("RAISE") && at_kind(TokenKind::LParen, 1)) {
                ++pos_;
                skip_balanced();
                return;
            }
        }

        bool callable = t->kind == TokenKind::Word && at_kind(TokenKind::LParen, 1);
        if (callable) {
            parse_function_call();
            return;
        }
        if (t->kind == TokenKind::Word && is_reserved(*t)) fail("unexpected keyword");

        std::size_t first = pos_++;
        if (at_kind(TokenKind::Dot)) {
            ++pos_;
            if (at_op("*")) {
                add_star(toks_[first].text, first, pos_);
                ++pos_;
                return;
            }
            std::size_t second = expect_identifier();
            if (at_kind(TokenKind::Dot)) {
                ++pos_;
                std::size_t third = expect_identifier();
                add_column(toks_[second].text, second, third);
                return;
            }
            add_column(toks_[first].text, first, second);
            return;
        }
        add_column({}, kNoToken, first);
    }

    void add_column(std::string qualifier, std::size_t qualifier_token, std::size_t name_token) {
        ColumnRef ref;
        ref.qualifier = std::move(qualifier);
        ref.qualifier_token = qualifier_token;
        ref.name = toks_[name_token].text;
        ref.token = name_token;
        ref.clause = clause_;
        ref.double_quoted = ref.qualifier.empty() && !ref.name.empty() && ref.name.front() == '"';
        scope().columns.push_back(std::move(ref));
    }

    void parse_function_call() {
        std::size_t name_tok = pos_;
        out_.function_tokens.push_back(name_tok);
        pos_ += 2;  // name (
        bool count_star = false;
        if (at_kind(TokenKind::RParen)) {
            ++pos_;
        } else {
            if (!accept_kw("DISTINCT")) accept_kw("ALL");
            if (at_op("*")) {
                ++pos_;
                count_star = toks_[name_tok].is("COUNT");
            } else {
                parse_expr_list();
                if (at_kw("ORDER") && at_kw("BY", 1)) {
                    pos_ += 2;
                    parse_ordering_terms();
                }
            }
            expect_kind(TokenKind::RParen, "')'");
        }
        if (count_star && clause_ == Clause::Select) scope().count_star = true;
        if (at_kw("FILTER") && at_kind(TokenKind::LParen, 1)) {
            pos_ += 2;
            expect_kw("WHERE");
            parse_expr();
            expect_kind(TokenKind::RParen, "')'");
        }
        if (accept_kw("OVER")) {
            if (at_kind(TokenKind::LParen)) {
                parse_window_definition();
            } else {
                expect_identifier();
            }
        }
    }

    void skip_balanced() {
        expect_kind(TokenKind::LParen, "'('");
        int depth = 1;
        while (pos_ < toks_.size() && depth > 0) {
            if (toks_[pos_].kind == TokenKind::LParen) ++depth;
            if (toks_[pos_].kind == TokenKind::RParen) --depth;
            ++pos_;
        }
        if (depth != 0) fail("unbalanced parentheses");
    }
};

}  // namespace

ParsedQuery parse_sql(std::string_view sql) {
    ParsedQuery out;
    out.text = std::string(sql);
    out.tokens = tokenize(out.text);
    Parser parser(out);
    parser.parse();
    return out;
}

}  // namespace route
