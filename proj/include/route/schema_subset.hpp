#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "route/identifier.hpp"

namespace route {

class DatabaseCatalog;

class SubsetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Selection of tables and, per table, columns. A table with an empty column
/// set is selected without specific columns. Names compare case-insensitively.
class SchemaSubset {
  public:
    using ColumnSet = std::set<std::string, IdentLess>;
    using Entries = std::map<std::string, ColumnSet, IdentLess>;

    SchemaSubset() = default;
    explicit SchemaSubset(std::string db_id) : db_id_(std::move(db_id)) {}

    /// Every table and column of the catalog.
    static SchemaSubset full(const DatabaseCatalog& catalog);

    void add_table(std::string_view table);
    void add_column(std::string_view table, std::string_view column);

    bool empty() const { return entries_.empty(); }
    bool contains_table(std::string_view table) const;
    bool contains_column(std::string_view table, std::string_view column) const;
    std::size_t table_count() const { return entries_.size(); }
    std::size_t column_count() const;

    const Entries& entries() const { return entries_; }
    const std::string& db_id() const { return db_id_; }
    void set_db_id(std::string db_id) { db_id_ = std::move(db_id); }

    /// Throws SubsetError naming the first table/column that does not resolve.
    void validate(const DatabaseCatalog& catalog) const;

    friend bool operator==(const SchemaSubset& a, const SchemaSubset& b);

  private:
    std::string db_id_;
    Entries entries_;
};

/// Table-wise union with per-table column union. Throws SubsetError when both
/// subsets are bound to different databases.
SchemaSubset merge(const SchemaSubset& a, const SchemaSubset& b);

}  // namespace route
