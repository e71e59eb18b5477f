#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "route/identifier.hpp"
#include "route/sql_query.hpp"

namespace route {

class SchemaSubset;

/// Raised for malformed or inconsistent corpus input. The message names the
/// offending file and record index when known.
class CorpusError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Column {
    std::string name;
    std::string type;
};

struct ForeignKey {
    std::string column;
    std::string ref_table;
    std::string ref_column;
};

struct TableSchema {
    std::string name;
    std::vector<Column> columns;
    std::vector<std::string> primary_keys;
    std::vector<ForeignKey> foreign_keys;

    const Column* find_column(std::string_view column) const;
    std::vector<std::string> column_names() const;
};

/// Immutable schema of one database plus the path of its SQLite file.
class DatabaseCatalog {
  public:
    /// Validates the catalog invariants; throws CorpusError on violation.
    DatabaseCatalog(std::string db_id, std::vector<TableSchema> tables, std::filesystem::path db_file);

    const std::string& db_id() const { return db_id_; }
    const std::vector<TableSchema>& tables() const { return tables_; }
    const std::filesystem::path& db_file() const { return db_file_; }

    /// Case-insensitive, quote-stripped lookup.
    const TableSchema* find_table(std::string_view name) const;
    std::vector<std::string> table_names() const;

  private:
    std::string db_id_;
    std::vector<TableSchema> tables_;
    std::filesystem::path db_file_;
};

struct CorpusPair {
    std::string pair_id;
    std::string db_id;
    std::string question;
    std::optional<std::string> hint;
    SqlQuery gold_sql;
    std::optional<std::string> difficulty_label;

    friend bool operator==(const CorpusPair&, const CorpusPair&) = default;
};

/// Catalogs plus question/SQL pairs. Catalogs are shared between copies, so
/// filtered sub-corpora are cheap.
class Corpus {
  public:
    Corpus() = default;
    Corpus(std::map<std::string, std::shared_ptr<const DatabaseCatalog>> catalogs, std::vector<CorpusPair> pairs);

    const std::vector<CorpusPair>& pairs() const { return pairs_; }
    const std::map<std::string, std::shared_ptr<const DatabaseCatalog>>& catalogs() const { return catalogs_; }

    const DatabaseCatalog& catalog(std::string_view db_id) const;
    const CorpusPair* find_pair(std::string_view pair_id) const;

    /// Same catalogs, different pair list (validated).
    Corpus with_pairs(std::vector<CorpusPair> pairs) const;

  private:
    std::map<std::string, std::shared_ptr<const DatabaseCatalog>> catalogs_;
    std::vector<CorpusPair> pairs_;
};

/// File names inside a corpus root. Empty fields are auto-detected.
struct CorpusLayout {
    std::string schema_index;  // default: tables.json, then *_tables.json
    std::string pairs_file;    // default: pairs.json(l), dev.json, train.json, train_spider.json, test.json
    std::string database_dir;  // default: database/, then *_databases/
};

/// Reads a benchmark schema index. When `database_dir` is non-empty each
/// catalog's db_file is database_dir/<db_id>/<db_id>.sqlite.
std::vector<DatabaseCatalog> load_schema_index(const std::filesystem::path& file,
                                               const std::filesystem::path& database_dir = {});

/// Accepts a JSON array or line-delimited JSON.
std::vector<CorpusPair> read_pairs(const std::filesystem::path& file);
void write_pairs(const std::filesystem::path& file, const std::vector<CorpusPair>& pairs);

Corpus load_corpus(const std::filesystem::path& root, const CorpusLayout& layout = {});

/// CREATE-TABLE-style description of the catalog (or of `subset`), followed by
/// up to `example_rows` sample rows per table read from the database file.
/// Throws CorpusError when the subset does not resolve or the file is unreadable.
std::string render_schema(const DatabaseCatalog& catalog, const SchemaSubset* subset, std::size_t example_rows);

}  // namespace route
