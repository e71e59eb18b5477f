#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "route/catalog.hpp"
#include "route/schema_subset.hpp"
#include "route/sql_parser.hpp"
#include "route/sql_query.hpp"
#include "route/warning.hpp"

namespace route {

struct Extraction {
    SchemaSubset subset;
    std::vector<Warning> warnings;
};

/// Tables and columns referenced anywhere in `sql`, resolved against the
/// catalog. Identifiers that do not resolve are dropped and reported.
/// Throws SqlParseError when the query does not parse.
Extraction extract_schema_elements(const SqlQuery& sql, const DatabaseCatalog& catalog,
                                   std::string_view pair_id = {});

/// Same as above over an already parsed query.
Extraction extract_schema_elements(const ParsedQuery& parsed, const DatabaseCatalog& catalog,
                                   std::string_view pair_id = {});

enum class HardnessLevel : int { Simple = 1, Medium = 2, Hard = 3 };

std::string_view to_string(HardnessLevel level);

/// Number of distinct tables referenced anywhere in the query, clamped to 1..3.
HardnessLevel difficulty(const SqlQuery& sql, const DatabaseCatalog& catalog);

/// Lexer tokens of the normalized query text.
std::size_t token_count(const SqlQuery& sql);

/// The normalized text up to the end of its k-th token (1-based).
/// Throws SqlError when k is 0 or exceeds the token count.
std::string truncate_at(const SqlQuery& sql, std::size_t k);

/// The k that truncate_random draws for a query of `token_count` tokens.
std::size_t choose_truncation_point(std::size_t token_count, std::uint64_t seed);

/// Prefix of k tokens with k uniform in [1, n-1]. Throws SqlError for
/// queries with fewer than two tokens.
std::string truncate_random(const SqlQuery& sql, std::uint64_t seed);

enum class RefinementStrategy { SelectOnly, HalfPrefix };

std::string_view to_string(RefinementStrategy strategy);
RefinementStrategy parse_refinement_strategy(std::string_view text);

/// "SELECT" for SelectOnly, else the first ceil(n/2) tokens. Queries that do
/// not start with SELECT or WITH (or fail to lex) fall back to "SELECT".
std::string truncate_for_refinement(const SqlQuery& sql, RefinementStrategy strategy);

}  // namespace route
