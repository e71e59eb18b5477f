#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "route/catalog.hpp"
#include "route/schema_subset.hpp"
#include "route/sql_query.hpp"
#include "route/warning.hpp"

namespace route {

enum class TaskTag { TS, SL, NC, CW, FILTER };

std::string_view to_string(TaskTag task);
TaskTag parse_task_tag(std::string_view text);

struct PromptMeta {
    std::string pair_id;
    std::string db_id;
};

struct PromptText {
    TaskTag task = TaskTag::TS;
    std::string text;
    PromptMeta meta;
};

class PromptError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kDefaultExampleRows = 3;

/// Reply meaning "the SQL answers the question".
inline constexpr std::string_view kAffirmativeAnswer =
    "The execution results of the SQL query can correctly answer the question.";
inline constexpr std::string_view kNegativePhrase = "cannot correctly answer";

/// Reply meaning "the SQL is wrong, use `sql` instead".
std::string negative_answer(std::string_view sql);

// `schema_text` is the output of render_schema. Every builder throws
// PromptError when the question is empty.
PromptText build_ts_prompt(std::string_view schema_text, std::string_view question,
                           const std::optional<std::string>& hint, PromptMeta meta = {});
PromptText build_sl_prompt(std::string_view schema_text, std::string_view question,
                           const std::optional<std::string>& hint, PromptMeta meta = {});
/// The exception section is emitted only when `exception` is non-empty.
PromptText build_nc_prompt(std::string_view schema_text, std::string_view question,
                           const std::optional<std::string>& hint, const SqlQuery& sql, std::string_view exception,
                           PromptMeta meta = {});
PromptText build_cw_prompt(std::string_view schema_text, std::string_view question,
                           const std::optional<std::string>& hint, std::string_view partial_sql,
                           PromptMeta meta = {});
PromptText build_filter_prompt(std::string_view schema_text, std::string_view question,
                               const std::optional<std::string>& hint, const SqlQuery& sql, PromptMeta meta = {});

/// Canonical linking answer: one "table: col1, col2" line per table, in
/// catalog declaration order.
std::string render_linking(const SchemaSubset& subset, const DatabaseCatalog& catalog);

/// Lenient inverse of render_linking. Lines that do not resolve are skipped
/// and reported through `warnings` when given.
SchemaSubset parse_sl_response(std::string_view text, const DatabaseCatalog& catalog,
                               std::vector<Warning>* warnings = nullptr, std::string_view pair_id = {});

struct NcVerdict {
    bool is_correct = true;
    std::optional<SqlQuery> corrected_sql;  // only for negative verdicts
};

NcVerdict parse_nc_response(std::string_view text);

class ExtractionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// First fenced block, else the first SELECT/WITH statement in the text.
/// Throws ExtractionError when no SQL is found.
SqlQuery extract_sql(std::string_view text, SqlOrigin origin = SqlOrigin::Predicted);
std::optional<SqlQuery> try_extract_sql(std::string_view text, SqlOrigin origin = SqlOrigin::Predicted);

}  // namespace route
