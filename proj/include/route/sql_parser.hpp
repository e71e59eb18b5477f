#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "route/sql_lexer.hpp"

namespace route {

inline constexpr std::size_t kNoToken = std::numeric_limits<std::size_t>::max();

/// Clause in which a column reference occurs.
enum class Clause { Select, Join, Where, GroupBy, Having, OrderBy, Limit, Window, Values, Other };

struct ColumnRef {
    std::string qualifier;  // raw text, empty when unqualified
    std::string name;       // raw text, "*" for star references
    std::size_t token = kNoToken;
    std::size_t qualifier_token = kNoToken;
    Clause clause = Clause::Other;
    bool star = false;
    /// A bare "..." token; SQLite reads it as a string when no column matches.
    bool double_quoted = false;
};

struct SourceRef {
    std::string name;   // raw table name; empty for subqueries
    std::string alias;  // raw alias, may be empty
    std::size_t name_token = kNoToken;
    int derived_scope = -1;  // first core of a FROM subquery or CTE body
    bool is_cte = false;
    bool is_function = false;  // table-valued function
    bool joined = false;       // not the first source of its FROM clause
    bool via_join = false;     // introduced by a JOIN keyword rather than a comma
    std::vector<std::string> using_columns;

    const std::string& visible_name() const { return alias.empty() ? name : alias; }
    bool physical() const { return derived_scope < 0 && !is_cte && !is_function && !name.empty(); }
};

/// One SELECT core (or VALUES clause) with the names visible inside it.
struct Scope {
    int parent = -1;  // enclosing scope for correlated lookups
    std::vector<SourceRef> sources;
    std::vector<ColumnRef> columns;
    std::vector<std::string> output_names;
    std::vector<std::string> aliases;  // explicit result-column aliases only
    bool output_has_star = false;
    bool count_star = false;  // COUNT(*) appears in the select list
    std::size_t begin_token = 0;
    std::size_t end_token = 0;  // exclusive
};

/// A compound SELECT with at least two cores joined by set operators.
struct Compound {
    std::vector<std::pair<std::size_t, std::size_t>> cores;      // token spans [begin, end)
    std::vector<std::pair<std::size_t, std::size_t>> operators;  // operators[i] joins cores[i] and cores[i+1]
};

struct ParsedQuery {
    std::string text;
    std::vector<Token> tokens;
    std::vector<Scope> scopes;
    int root_scope = 0;  // first core of the outermost statement
    std::vector<Compound> compounds;
    bool outer_order_by = false;
    std::vector<std::size_t> function_tokens;
};

/// Recursive-descent parser for SQLite query statements (WITH, compound
/// SELECT, joins, subqueries, window functions). Throws SqlParseError.
ParsedQuery parse_sql(std::string_view sql);

}  // namespace route
