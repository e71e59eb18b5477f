#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "route/catalog.hpp"
#include "route/executor.hpp"
#include "route/llm.hpp"
#include "route/prompts.hpp"
#include "route/schema_subset.hpp"
#include "route/sqlkit.hpp"
#include "route/warning.hpp"

namespace route {

struct McpOptions {
    bool enable_sl = true;
    bool enable_nc = true;
    bool enable_cw = true;
    RefinementStrategy strategy = RefinementStrategy::SelectOnly;
    bool oracle_schema = false;  // U1: link with the gold query's schema elements
    bool oracle_hint = false;    // U2: continue from the first half of the gold query
    int nc_rounds = 1;
    int cw_rounds = 1;
    std::int64_t timeout_ms = kDefaultTimeoutMs;
    std::size_t example_rows = kDefaultExampleRows;
    GenerationParams params;
};

struct McpQuestion {
    std::string pair_id;
    std::string question;
    std::optional<std::string> hint;
    std::optional<SqlQuery> gold;  // required by the oracle modes
};

McpQuestion question_of(const CorpusPair& pair);

enum class CwReason { None, ExecFailed, Hard };
std::string_view to_string(CwReason reason);

struct LinkResult {
    SchemaSubset subset;
    std::optional<SqlQuery> pseudo_sql;
    bool fell_back = false;  // nothing linked, full catalog used
    std::vector<Warning> warnings;
};

/// SL answer merged with the elements of a pseudo query written against the
/// full schema. Propagates BackendError.
LinkResult link_schema(const DatabaseCatalog& catalog, const McpQuestion& q, LlmBackend& backend,
                       const McpOptions& options);

/// TS answer over the rendered subset; an empty query when no SQL can be
/// extracted. Propagates BackendError.
SqlQuery generate_sql(const SchemaSubset& subset, const DatabaseCatalog& catalog, const McpQuestion& q,
                      LlmBackend& backend, const McpOptions& options);

struct NcStep {
    SqlQuery sql;  // incumbent after the step
    NcVerdict verdict;
    bool applied = false;
    std::optional<ExecutionOutcome> candidate_outcome;
    std::optional<std::string> error;
};

/// One discrimination/correction round over the full catalog. The correction
/// replaces `sql` only when it executes.
NcStep correct_noise(const DatabaseCatalog& catalog, const McpQuestion& q, const SqlQuery& sql,
                     const ExecutionOutcome& outcome, LlmBackend& backend, const McpOptions& options);

struct CwStep {
    SqlQuery sql;
    std::string prefix;
    std::optional<SqlQuery> candidate;
    bool applied = false;
    std::optional<ExecutionOutcome> candidate_outcome;
    std::optional<std::string> error;
};

/// Continuation from `prefix`; the completion replaces `sql` only when it executes.
CwStep refine_by_continuation(const DatabaseCatalog& catalog, const McpQuestion& q, const SqlQuery& sql,
                              const std::string& prefix, LlmBackend& backend, const McpOptions& options);

struct McpTrace {
    std::string pair_id;
    std::string db_id;
    SchemaSubset linked_subset;
    bool schema_fallback = false;
    std::optional<SqlQuery> pseudo_sql;
    SqlQuery initial_sql;
    std::optional<ExecutionOutcome> initial_outcome;
    std::vector<NcStep> nc_steps;
    bool nc_applied = false;
    bool cw_triggered = false;
    CwReason cw_reason = CwReason::None;
    std::vector<CwStep> cw_steps;
    bool cw_applied = false;
    SqlQuery final_sql;
    std::optional<ExecutionOutcome> final_outcome;
    std::size_t backend_calls = 0;
    std::vector<std::string> errors;
    std::vector<Warning> warnings;
};

/// Link, generate, correct, and continue when the query fails or is hard.
/// Backend failures during linking or generation end the run with an error
/// record and an empty final query; later failures keep the incumbent.
McpTrace run_mcp(const DatabaseCatalog& catalog, const McpQuestion& q, const McpOptions& options,
                 LlmBackend& backend);

/// Deterministic JSON form (no timings).
nlohmann::ordered_json trace_to_json(const McpTrace& trace);
nlohmann::ordered_json subset_to_json(const SchemaSubset& subset);

}  // namespace route
