#include "route/executor.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "route/sql_parser.hpp"
#include "sqlite_handle.hpp"

namespace route {

std::string_view to_string(ExecStatus status) {
    switch (status) {
        case ExecStatus::Ok:
            return "ok";
        case ExecStatus::Error:
            return "error";
        case ExecStatus::Timeout:
            return "timeout";
    }
    return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

struct Deadline {
    Clock::time_point at;
    bool expired = false;
};

int progress_callback(void* arg) {
    auto* d = static_cast<Deadline*>(arg);
    if (Clock::now() >= d->at) {
        d->expired = true;
        return 1;
    }
    return 0;
}

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

ExecutionOutcome execute(const std::filesystem::path& db_file, const SqlQuery& sql, std::int64_t timeout_ms) {
    const auto start = Clock::now();
    ExecutionOutcome out;
    auto fail = [&](std::string message) {
        out.status = ExecStatus::Error;
        out.rows.clear();
        out.exception = std::move(message);
        out.elapsed_ms = ms_since(start);
        return out;
    };

    if (sql.empty()) return fail("empty SQL");
    std::string error;
    detail::SqliteHandle db = detail::open_read_only(db_file, error);
    if (!db) return fail(error);

    Deadline deadline{start + std::chrono::milliseconds(std::max<std::int64_t>(timeout_ms, 1))};
    sqlite3_progress_handler(db.get(), 1000, progress_callback, &deadline);

    const char* tail = nullptr;
    sqlite3_stmt* raw = nullptr;
    int rc = sqlite3_prepare_v2(db.get(), sql.text.c_str(), static_cast<int>(sql.text.size()), &raw, &tail);
    detail::StmtHandle stmt(raw);
    if (rc != SQLITE_OK) return fail(sqlite3_errmsg(db.get()));
    if (!stmt) return fail("empty SQL");

    // Anything after the first statement must be whitespace, comments or semicolons.
    const char* end = sql.text.c_str() + sql.text.size();
    while (tail && tail < end) {
        sqlite3_stmt* extra_raw = nullptr;
        const char* next = nullptr;
        rc = sqlite3_prepare_v2(db.get(), tail, static_cast<int>(end - tail), &extra_raw, &next);
        detail::StmtHandle extra(extra_raw);
        if (rc != SQLITE_OK || extra) return fail("only a single statement may be executed");
        if (next == tail) break;
        tail = next;
    }

    if (!sqlite3_stmt_readonly(stmt.get())) return fail("attempt to write a readonly database");

    const int ncol = sqlite3_column_count(stmt.get());
    for (;;) {
        rc = sqlite3_step(stmt.get());
        if (rc == SQLITE_ROW) {
            Row row;
            row.reserve(static_cast<std::size_t>(ncol));
            for (int c = 0; c < ncol; ++c) row.push_back(detail::read_value(stmt.get(), c));
            out.rows.push_back(std::move(row));
            continue;
        }
        if (rc == SQLITE_DONE) break;
        if (deadline.expired || rc == SQLITE_INTERRUPT) {
            out.status = ExecStatus::Timeout;
            out.rows.clear();
            out.exception = "timeout";
            out.elapsed_ms = ms_since(start);
            return out;
        }
        return fail(sqlite3_errmsg(db.get()));
    }
    out.status = ExecStatus::Ok;
    out.elapsed_ms = ms_since(start);
    return out;
}

namespace {

constexpr double kRelTol = 1e-6;

int type_rank(const Value& v) {
    switch (v.index()) {
        case 0:
            return 0;
        case 1:
        case 2:
            return 1;
        case 3:
            return 2;
        default:
            return 3;
    }
}

long double numeric(const Value& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<long double>(*i);
    return static_cast<long double>(std::get<double>(v));
}

bool values_equal(const Value& a, const Value& b) {
    int ra = type_rank(a);
    if (ra != type_rank(b)) return false;
    switch (ra) {
        case 0:
            return true;
        case 1: {
            auto* ia = std::get_if<std::int64_t>(&a);
            auto* ib = std::get_if<std::int64_t>(&b);
            if (ia && ib) return *ia == *ib;
            long double x = numeric(a), y = numeric(b);
            if (x == y) return true;
            if (std::isnan(static_cast<double>(x)) || std::isnan(static_cast<double>(y))) return false;
            return std::fabs(x - y) <= kRelTol * std::max(std::fabs(x), std::fabs(y));
        }
        case 2:
            return std::get<std::string>(a) == std::get<std::string>(b);
        default:
            return std::get<Blob>(a) == std::get<Blob>(b);
    }
}

/// Strict weak order used to canonicalise row multisets before comparison.
bool value_less(const Value& a, const Value& b) {
    int ra = type_rank(a), rb = type_rank(b);
    if (ra != rb) return ra < rb;
    switch (ra) {
        case 0:
            return false;
        case 1:
            return numeric(a) < numeric(b);
        case 2:
            return std::get<std::string>(a) < std::get<std::string>(b);
        default:
            return std::get<Blob>(a).bytes < std::get<Blob>(b).bytes;
    }
}

bool row_less(const Row& a, const Row& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), value_less);
}

bool rows_equal(const Row& a, const Row& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), values_equal);
}

bool sequences_equal(const std::vector<Row>& a, const std::vector<Row>& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), rows_equal);
}

}  // namespace

bool results_match(const ExecutionOutcome& gold, const ExecutionOutcome& pred, bool order_sensitive) {
    if (!gold.ok() || !pred.ok()) return false;
    if (gold.rows.size() != pred.rows.size()) return false;
    if (order_sensitive) return sequences_equal(gold.rows, pred.rows);
    std::vector<Row> g = gold.rows, p = pred.rows;
    std::sort(g.begin(), g.end(), row_less);
    std::sort(p.begin(), p.end(), row_less);
    return sequences_equal(g, p);
}

bool has_outer_order_by(const SqlQuery& sql) {
    try {
        return parse_sql(sql.text).outer_order_by;
    } catch (const SqlParseError&) {
    }
    std::vector<Token> tokens;
    try {
        tokens = tokenize(sql.text);
    } catch (const SqlParseError&) {
        return false;
    }
    int depth = 0;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (tokens[i].kind == TokenKind::LParen) ++depth;
        if (tokens[i].kind == TokenKind::RParen) --depth;
        if (depth == 0 && tokens[i].is("ORDER") && tokens[i + 1].is("BY")) return true;
    }
    return false;
}

PairScore score_pair(const DatabaseCatalog& catalog, const SqlQuery& gold_sql, const SqlQuery& pred_sql,
                     std::int64_t timeout_ms) {
    PairScore score;
    score.gold = execute(catalog.db_file(), gold_sql, timeout_ms);
    if (!score.gold.ok()) {
        score.gold_failed = true;
        spdlog::warn("gold query failed on {}: {}", catalog.db_id(), score.gold.exception);
        return score;
    }
    score.pred = execute(catalog.db_file(), pred_sql, timeout_ms);
    score.correct = results_match(score.gold, score.pred, has_outer_order_by(gold_sql));
    return score;
}

bool ex_for_pair(const DatabaseCatalog& catalog, const SqlQuery& gold_sql, const SqlQuery& pred_sql,
                 std::int64_t timeout_ms) {
    return score_pair(catalog, gold_sql, pred_sql, timeout_ms).correct;
}

}  // namespace route
