#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "route/catalog.hpp"
#include "route/sql_query.hpp"
#include "route/value.hpp"

namespace route {

inline constexpr std::int64_t kDefaultTimeoutMs = 30000;

enum class ExecStatus { Ok, Error, Timeout };

std::string_view to_string(ExecStatus status);

struct ExecutionOutcome {
    ExecStatus status = ExecStatus::Error;
    std::vector<Row> rows;  // populated when ok
    std::string exception;  // engine message when error, "timeout" on timeout
    double elapsed_ms = 0.0;

    bool ok() const { return status == ExecStatus::Ok; }
};

/// Runs the first statement of `sql` on a read-only connection. Never throws:
/// open failures, engine errors, writes and extra statements become error
/// outcomes; exceeding `timeout_ms` becomes a timeout outcome.
ExecutionOutcome execute(const std::filesystem::path& db_file, const SqlQuery& sql,
                         std::int64_t timeout_ms = kDefaultTimeoutMs);

/// EX comparison. Non-ok outcomes never match. Numbers compare with relative
/// tolerance 1e-6, text byte-exact, NULL equals NULL; column order matters.
bool results_match(const ExecutionOutcome& gold, const ExecutionOutcome& pred, bool order_sensitive);

/// True when the outermost statement of `sql` ends with an ORDER BY clause.
bool has_outer_order_by(const SqlQuery& sql);

struct PairScore {
    bool correct = false;
    bool gold_failed = false;  // corpus defect: the gold query itself did not run
    ExecutionOutcome gold;
    ExecutionOutcome pred;
};

PairScore score_pair(const DatabaseCatalog& catalog, const SqlQuery& gold_sql, const SqlQuery& pred_sql,
                     std::int64_t timeout_ms = kDefaultTimeoutMs);

bool ex_for_pair(const DatabaseCatalog& catalog, const SqlQuery& gold_sql, const SqlQuery& pred_sql,
                 std::int64_t timeout_ms = kDefaultTimeoutMs);

}  // namespace route
