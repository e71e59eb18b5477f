#include "route/schema_subset.hpp"

#include "route/catalog.hpp"

namespace route {

SchemaSubset SchemaSubset::full(const DatabaseCatalog& catalog) {
    SchemaSubset subset(catalog.db_id());
    for (const auto& table : catalog.tables()) {
        subset.add_table(table.name);
        for (const auto& column : table.columns) subset.add_column(table.name, column.name);
    }
    return subset;
}

void SchemaSubset::add_table(std::string_view table) {
    if (entries_.find(table) == entries_.end()) entries_.emplace(std::string(table), ColumnSet{});
}

void SchemaSubset::add_column(std::string_view table, std::string_view column) {
    auto it = entries_.find(table);
    if (it == entries_.end()) it = entries_.emplace(std::string(table), ColumnSet{}).first;
    it->second.emplace(column);
}

bool SchemaSubset::contains_table(std::string_view table) const { return entries_.find(table) != entries_.end(); }

bool SchemaSubset::contains_column(std::string_view table, std::string_view column) const {
    auto it = entries_.find(table);
    return it != entries_.end() && it->second.find(column) != it->second.end();
}

std::size_t SchemaSubset::column_count() const {
    std::size_t n = 0;
    for (const auto& [_, cols] : entries_) n += cols.size();
    return n;
}

void SchemaSubset::validate(const DatabaseCatalog& catalog) const {
    if (!db_id_.empty() && db_id_ != catalog.db_id()) {
        throw SubsetError("subset bound to database '" + db_id_ + "' validated against '" + catalog.db_id() + "'");
    }
    for (const auto& [table, columns] : entries_) {
        const TableSchema* schema = catalog.find_table(table);
        if (!schema) throw SubsetError("unknown table '" + table + "' in database '" + catalog.db_id() + "'");
        for (const auto& column : columns) {
            if (!schema->find_column(column)) {
                throw SubsetError("unknown column '" + table + "." + column + "' in database '" + catalog.db_id() +
                                  "'");
            }
        }
    }
}

bool operator==(const SchemaSubset& a, const SchemaSubset& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    auto ia = a.entries_.begin();
    auto ib = b.entries_.begin();
    for (; ia != a.entries_.end(); ++ia, ++ib) {
        if (!ident_equal(ia->first, ib->first) || ia->second.size() != ib->second.size()) return false;
        auto ca = ia->second.begin();
        auto cb = ib->second.begin();
        for (; ca != ia->second.end(); ++ca, ++cb) {
            if (!ident_equal(*ca, *cb)) return false;
        }
    }
    return true;
}

SchemaSubset merge(const SchemaSubset& a, const SchemaSubset& b) {
    if (!a.db_id().empty() && !b.db_id().empty() && a.db_id() != b.db_id()) {
        throw SubsetError("cannot merge subsets of '" + a.db_id() + "' and '" + b.db_id() + "'");
    }
    SchemaSubset out(a.db_id().empty() ? b.db_id() : a.db_id());
    for (const auto* side : {&a, &b}) {
        for (const auto& [table, columns] : side->entries()) {
            out.add_table(table);
            for (const auto& column : columns) out.add_column(table, column);
        }
    }
    return out;
}

}  // namespace route
