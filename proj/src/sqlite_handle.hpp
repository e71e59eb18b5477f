#pragma once

#include <sqlite3.h>

#include <filesystem>
#include <memory>
#include <string>

#include "route/value.hpp"

namespace route::detail {

struct SqliteCloser {
    void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
struct StmtFinalizer {
    void operator()(sqlite3_stmt* stmt) const { sqlite3_finalize(stmt); }
};

using SqliteHandle = std::unique_ptr<sqlite3, SqliteCloser>;
using StmtHandle = std::unique_ptr<sqlite3_stmt, StmtFinalizer>;

/// Opens `path` read-only; never creates a file. On failure returns null and
/// fills `error`.
inline SqliteHandle open_read_only(const std::filesystem::path& path, std::string& error) {
    if (!std::filesystem::is_regular_file(path)) {
        error = "unable to open database file: " + path.string();
        return nullptr;
    }
    sqlite3* raw = nullptr;
    int rc = sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX, nullptr);
    SqliteHandle db(raw);
    if (rc != SQLITE_OK) {
        error = raw ? sqlite3_errmsg(raw) : "unable to open database file";
        return nullptr;
    }
    sqlite3_limit(raw, SQLITE_LIMIT_ATTACHED, 0);
    return db;
}

inline Value read_value(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_INTEGER:
            return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT:
            return sqlite3_column_double(stmt, col);
        case SQLITE_TEXT: {
            auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
            return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)));
        }
        case SQLITE_BLOB: {
            auto* p = static_cast<const char*>(sqlite3_column_blob(stmt, col));
            auto n = static_cast<std::size_t>(sqlite3_column_bytes(stmt, col));
            return Blob{p ? std::string(p, n) : std::string()};
        }
        default:
            return std::monostate{};
    }
}

}  // namespace route::detail
