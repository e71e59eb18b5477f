#include "route/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <sstream>

#include "route/schema_subset.hpp"
#include "sqlite_handle.hpp"

namespace route {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- TableSchema / DatabaseCatalog ---------------------------------------

const Column* TableSchema::find_column(std::string_view column) const {
    for (const auto& c : columns) {
        if (ident_equal(c.name, column)) return &c;
    }
    return nullptr;
}

std::vector<std::string> TableSchema::column_names() const {
    std::vector<std::string> names;
    names.reserve(columns.size());
    for (const auto& c : columns) names.push_back(c.name);
    return names;
}

DatabaseCatalog::DatabaseCatalog(std::string db_id, std::vector<TableSchema> tables, fs::path db_file)
    : db_id_(std::move(db_id)), tables_(std::move(tables)), db_file_(std::move(db_file)) {
    if (db_id_.empty()) throw CorpusError("catalog with empty db_id");
    for (std::size_t i = 0; i < tables_.size(); ++i) {
        const auto& t = tables_[i];
        if (t.columns.empty()) throw CorpusError("table '" + t.name + "' in '" + db_id_ + "' has no columns");
        for (std::size_t j = 0; j < i; ++j) {
            if (ident_equal(tables_[j].name, t.name)) {
                throw CorpusError("duplicate table name '" + t.name + "' in '" + db_id_ + "'");
            }
        }
        for (std::size_t a = 0; a < t.columns.size(); ++a) {
            for (std::size_t b = 0; b < a; ++b) {
                if (ident_equal(t.columns[a].name, t.columns[b].name)) {
                    throw CorpusError("duplicate column '" + t.name + "." + t.columns[a].name + "' in '" + db_id_ +
                                      "'");
                }
            }
        }
        for (const auto& pk : t.primary_keys) {
            if (!t.find_column(pk)) {
                throw CorpusError("primary key '" + pk + "' is not a column of '" + t.name + "' in '" + db_id_ + "'");
            }
        }
    }
    for (const auto& t : tables_) {
        for (const auto& fk : t.foreign_keys) {
            const TableSchema* ref = find_table(fk.ref_table);
            if (!t.find_column(fk.column) || !ref || !ref->find_column(fk.ref_column)) {
                throw CorpusError("foreign key " + t.name + "." + fk.column + " -> " + fk.ref_table + "." +
                                  fk.ref_column + " does not resolve in '" + db_id_ + "'");
            }
        }
    }
}

const TableSchema* DatabaseCatalog::find_table(std::string_view name) const {
    for (const auto& t : tables_) {
        if (ident_equal(t.name, name)) return &t;
    }
    return nullptr;
}

std::vector<std::string> DatabaseCatalog::table_names() const {
    std::vector<std::string> names;
    names.reserve(tables_.size());
    for (const auto& t : tables_) names.push_back(t.name);
    return names;
}

// ---- Corpus ------------------------------------------------------------------

Corpus::Corpus(std::map<std::string, std::shared_ptr<const DatabaseCatalog>> catalogs, std::vector<CorpusPair> pairs)
    : catalogs_(std::move(catalogs)), pairs_(std::move(pairs)) {
    for (const auto& p : pairs_) {
        if (!catalogs_.count(p.db_id)) {
            throw CorpusError("pair '" + p.pair_id + "' references unknown db_id '" + p.db_id + "'");
        }
        if (p.gold_sql.empty()) throw CorpusError("pair '" + p.pair_id + "' has an empty gold SQL");
    }
}

const DatabaseCatalog& Corpus::catalog(std::string_view db_id) const {
    auto it = catalogs_.find(std::string(db_id));
    if (it == catalogs_.end()) throw CorpusError("unknown db_id '" + std::string(db_id) + "'");
    return *it->second;
}

const CorpusPair* Corpus::find_pair(std::string_view pair_id) const {
    for (const auto& p : pairs_) {
        if (p.pair_id == pair_id) return &p;
    }
    return nullptr;
}

Corpus Corpus::with_pairs(std::vector<CorpusPair> pairs) const { return Corpus(catalogs_, std::move(pairs)); }

// ---- schema index ------------------------------------------------------------

namespace {

json read_json_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw CorpusError("cannot open " + file.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw CorpusError(file.string() + ": " + e.what());
    }
}

std::string json_to_id(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    return v.dump();
}

DatabaseCatalog parse_index_entry(const json& entry, const fs::path& database_dir) {
    const std::string db_id = entry.at("db_id").get<std::string>();
    const json& table_names =
        entry.contains("table_names_original") ? entry.at("table_names_original") : entry.at("table_names");
    const json& column_names =
        entry.contains("column_names_original") ? entry.at("column_names_original") : entry.at("column_names");
    const json empty = json::array();
    const json& column_types = entry.contains("column_types") ? entry.at("column_types") : empty;

    std::vector<TableSchema> tables;
    for (const auto& name : table_names) tables.push_back(TableSchema{name.get<std::string>(), {}, {}, {}});

    // Global column index -> (table index, column name); index 0 is the "*" pseudo-column.
    std::vector<std::pair<int, std::string>> columns;
    for (std::size_t i = 0; i < column_names.size(); ++i) {
        int table = column_names[i].at(0).get<int>();
        std::string name = column_names[i].at(1).get<std::string>();
        columns.emplace_back(table, name);
        if (table < 0) continue;
        if (static_cast<std::size_t>(table) >= tables.size()) {
            throw CorpusError("column '" + name + "' references table index " + std::to_string(table));
        }
        std::string type = i < column_types.size() ? column_types[i].get<std::string>() : std::string();
        tables[table].columns.push_back(Column{name, type});
    }

    auto column_at = [&](const json& idx) -> const std::pair<int, std::string>& {
        auto i = idx.get<long long>();
        if (i < 0 || static_cast<std::size_t>(i) >= columns.size() || columns[i].first < 0) {
            throw CorpusError("key references invalid column index " + std::to_string(i));
        }
        return columns[i];
    };

    if (entry.contains("primary_keys")) {
        for (const auto& pk : entry.at("primary_keys")) {
            std::vector<json> ids;
            if (pk.is_array()) {
                for (const auto& x : pk) ids.push_back(x);
            } else {
                ids.push_back(pk);
            }
            for (const auto& id : ids) {
                const auto& [table, name] = column_at(id);
                auto& keys = tables[table].primary_keys;
                if (std::none_of(keys.begin(), keys.end(), [&](const auto& k) { return ident_equal(k, name); })) {
                    keys.push_back(name);
                }
            }
        }
    }
    if (entry.contains("foreign_keys")) {
        for (const auto& fk : entry.at("foreign_keys")) {
            const auto& [from_table, from_col] = column_at(fk.at(0));
            const auto& [to_table, to_col] = column_at(fk.at(1));
            tables[from_table].foreign_keys.push_back(ForeignKey{from_col, tables[to_table].name, to_col});
        }
    }

    fs::path db_file;
    if (!database_dir.empty()) db_file = database_dir / db_id / (db_id + ".sqlite");
    return DatabaseCatalog(db_id, std::move(tables), db_file);
}

}  // namespace

std::vector<DatabaseCatalog> load_schema_index(const fs::path& file, const fs::path& database_dir) {
    json doc = read_json_file(file);
    if (!doc.is_array()) throw CorpusError(file.string() + ": schema index must be a JSON array");
    std::vector<DatabaseCatalog> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        try {
            out.push_back(parse_index_entry(doc[i], database_dir));
        } catch (const json::exception& e) {
            throw CorpusError(file.string() + " record " + std::to_string(i) + ": malformed schema entry: " + e.what());
        } catch (const CorpusError& e) {
            throw CorpusError(file.string() + " record " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

// ---- pairs -------------------------------------------------------------------

namespace {

CorpusPair parse_pair(const json& rec, std::size_t index) {
    CorpusPair p;
    if (rec.contains("pair_id")) {
        p.pair_id = json_to_id(rec.at("pair_id"));
    } else if (rec.contains("question_id")) {
        p.pair_id = json_to_id(rec.at("question_id"));
    } else {
        p.pair_id = std::to_string(index);
    }
    p.db_id = rec.at("db_id").get<std::string>();
    p.question = rec.at("question").get<std::string>();
    std::string sql;
    if (rec.contains("query")) {
        sql = rec.at("query").get<std::string>();
    } else if (rec.contains("SQL")) {
        sql = rec.at("SQL").get<std::string>();
    } else {
        throw CorpusError("missing 'query' or 'SQL'");
    }
    try {
        p.gold_sql = normalize(sql, SqlOrigin::Gold);
    } catch (const SqlError&) {
        throw CorpusError("empty gold SQL");
    }
    if (rec.contains("evidence") && rec.at("evidence").is_string() && !rec.at("evidence").get<std::string>().empty()) {
        p.hint = rec.at("evidence").get<std::string>();
    }
    if (rec.contains("difficulty") && rec.at("difficulty").is_string()) {
        p.difficulty_label = rec.at("difficulty").get<std::string>();
    }
    return p;
}

}  // namespace

std::vector<CorpusPair> read_pairs(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw CorpusError("cannot open " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    std::vector<json> records;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            json doc = json::parse(text);
            for (auto& r : doc) records.push_back(std::move(r));
        } catch (const json::parse_error& e) {
            throw CorpusError(file.string() + ": " + e.what());
        }
    } else {
        std::istringstream lines(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                records.push_back(json::parse(line));
            } catch (const json::parse_error& e) {
                throw CorpusError(file.string() + " line " + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    std::vector<CorpusPair> pairs;
    pairs.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            pairs.push_back(parse_pair(records[i], i));
        } catch (const json::exception& e) {
            throw CorpusError(file.string() + " record " + std::to_string(i) + ": " + e.what());
        } catch (const CorpusError& e) {
            throw CorpusError(file.string() + " record " + std::to_string(i) + ": " + e.what());
        }
    }
    return pairs;
}

void write_pairs(const fs::path& file, const std::vector<CorpusPair>& pairs) {
    json doc = json::array();
    for (const auto& p : pairs) {
        json rec = {{"pair_id", p.pair_id}, {"db_id", p.db_id}, {"question", p.question}, {"query", p.gold_sql.text}};
        if (p.hint) rec["evidence"] = *p.hint;
        if (p.difficulty_label) rec["difficulty"] = *p.difficulty_label;
        doc.push_back(std::move(rec));
    }
    std::ofstream out(file);
    if (!out) throw CorpusError("cannot write " + file.string());
    out << doc.dump(2) << '\n';
}

// ---- load_corpus ---------------------------------------------------------------

namespace {

fs::path find_first(const fs::path& root, std::initializer_list<const char*> names) {
    for (const char* n : names) {
        if (fs::exists(root / n)) return root / n;
    }
    return {};
}

fs::path find_suffix(const fs::path& root, std::string_view suffix, bool directory) {
    std::vector<fs::path> hits;
    for (const auto& e : fs::directory_iterator(root)) {
        auto name = e.path().filename().string();
        if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0 &&
            e.is_directory() == directory) {
            hits.push_back(e.path());
        }
    }
    std::sort(hits.begin(), hits.end());
    return hits.empty() ? fs::path{} : hits.front();
}

}  // namespace

Corpus load_corpus(const fs::path& root, const CorpusLayout& layout) {
    if (!fs::is_directory(root)) throw CorpusError("corpus root not found: " + root.string());

    fs::path index = layout.schema_index.empty() ? find_first(root, {"tables.json"}) : root / layout.schema_index;
    if (index.empty() && layout.schema_index.empty()) index = find_suffix(root, "_tables.json", false);
    if (index.empty() || !fs::exists(index)) throw CorpusError("schema index not found under " + root.string());

    fs::path pairs_file =
        layout.pairs_file.empty()
            ? find_first(root, {"pairs.json", "pairs.jsonl", "dev.json", "train.json", "train_spider.json", "test.json"})
            : root / layout.pairs_file;
    if (pairs_file.empty() || !fs::exists(pairs_file)) throw CorpusError("pairs file not found under " + root.string());

    fs::path db_dir = layout.database_dir.empty() ? find_first(root, {"database"}) : root / layout.database_dir;
    if (db_dir.empty() && layout.database_dir.empty()) db_dir = find_suffix(root, "_databases", true);
    if (db_dir.empty() || !fs::is_directory(db_dir)) {
        throw CorpusError("database directory not found under " + root.string());
    }

    std::map<std::string, std::shared_ptr<const DatabaseCatalog>> catalogs;
    for (auto& c : load_schema_index(index, db_dir)) {
        std::string id = c.db_id();
        if (catalogs.count(id)) throw CorpusError(index.string() + ": duplicate db_id '" + id + "'");
        catalogs.emplace(id, std::make_shared<const DatabaseCatalog>(std::move(c)));
    }

    auto pairs = read_pairs(pairs_file);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        auto it = catalogs.find(p.db_id);
        if (it == catalogs.end()) {
            throw CorpusError(pairs_file.string() + " record " + std::to_string(i) + ": pair '" + p.pair_id +
                              "' references unknown db_id '" + p.db_id + "'");
        }
        if (!fs::is_regular_file(it->second->db_file())) {
            throw CorpusError("database file not found for '" + p.db_id + "': " + it->second->db_file().string());
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (pairs[j].pair_id == p.pair_id) {
                throw CorpusError(pairs_file.string() + " record " + std::to_string(i) + ": duplicate pair_id '" +
                                  p.pair_id + "'");
            }
        }
    }
    return Corpus(std::move(catalogs), std::move(pairs));
}

// ---- render_schema -------------------------------------------------------------

namespace {

const std::regex& bare_identifier() {
    static const std::regex re("^[A-Za-z_][A-Za-z0-9_]*$");
    return re;
}

std::string quote_ident(std::string_view name) {
    if (std::regex_match(name.begin(), name.end(), bare_identifier())) return std::string(name);
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string always_quote(std::string_view name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

struct RenderedTable {
    const TableSchema* table;
    std::vector<const Column*> columns;
};

}  // namespace

std::string render_schema(const DatabaseCatalog& catalog, const SchemaSubset* subset, std::size_t example_rows) {
    if (subset) {
        try {
            subset->validate(catalog);
        } catch (const SubsetError& e) {
            throw CorpusError(e.what());
        }
    }

    std::vector<RenderedTable> included;
    for (const auto& table : catalog.tables()) {
        RenderedTable r{&table, {}};
        if (subset) {
            auto it = subset->entries().find(table.name);
            if (it == subset->entries().end()) continue;
            for (const auto& c : table.columns) {
                if (it->second.empty() || it->second.count(c.name)) r.columns.push_back(&c);
            }
        } else {
            for (const auto& c : table.columns) r.columns.push_back(&c);
        }
        included.push_back(std::move(r));
    }

    std::string out;
    for (const auto& r : included) {
        out += "CREATE TABLE " + quote_ident(r.table->name) + " (\n";
        std::vector<std::string> lines;
        for (const auto* c : r.columns) {
            lines.push_back("  " + quote_ident(c->name) + (c->type.empty() ? "" : " " + c->type));
        }
        auto rendered = [&](std::string_view column) {
            return std::any_of(r.columns.begin(), r.columns.end(),
                               [&](const Column* c) { return ident_equal(c->name, column); });
        };
        auto table_rendered = [&](std::string_view name) {
            return std::any_of(included.begin(), included.end(),
                               [&](const RenderedTable& t) { return ident_equal(t.table->name, name); });
        };
        const auto& pks = r.table->primary_keys;
        if (!pks.empty() && std::all_of(pks.begin(), pks.end(), rendered)) {
            std::string pk = "  PRIMARY KEY (";
            for (std::size_t i = 0; i < pks.size(); ++i) {
                if (i) pk += ", ";
                pk += quote_ident(pks[i]);
            }
            lines.push_back(pk + ")");
        }
        for (const auto& fk : r.table->foreign_keys) {
            if (!rendered(fk.column) || !table_rendered(fk.ref_table)) continue;
            lines.push_back("  FOREIGN KEY (" + quote_ident(fk.column) + ") REFERENCES " + quote_ident(fk.ref_table) +
                            "(" + quote_ident(fk.ref_column) + ")");
        }
        for (std::size_t i = 0; i < lines.size(); ++i) {
            out += lines[i];
            out += (i + 1 < lines.size()) ? ",\n" : "\n";
        }
        out += ");\n";
    }

    if (example_rows == 0 || included.empty()) return out;

    std::string error;
    auto db = detail::open_read_only(catalog.db_file(), error);
    if (!db) throw CorpusError("database file unreadable for '" + catalog.db_id() + "': " + error);

    for (const auto& r : included) {
        std::string sql = "SELECT ";
        for (std::size_t i = 0; i < r.columns.size(); ++i) {
            if (i) sql += ", ";
            sql += always_quote(r.columns[i]->name);
        }
        sql += " FROM " + always_quote(r.table->name) + " LIMIT " + std::to_string(example_rows);

        sqlite3_stmt* raw = nullptr;
        if (sqlite3_prepare_v2(db.get(), sql.c_str(), -1, &raw, nullptr) != SQLITE_OK) {
            throw CorpusError("cannot read sample rows of '" + r.table->name + "' in '" + catalog.db_id() +
                              "': " + sqlite3_errmsg(db.get()));
        }
        detail::StmtHandle stmt(raw);
        std::vector<std::string> rows;
        int rc;
        while ((rc = sqlite3_step(stmt.get())) == SQLITE_ROW) {
            std::string line;
            for (int c = 0; c < static_cast<int>(r.columns.size()); ++c) {
                if (c) line += " | ";
                line += format_value(detail::read_value(stmt.get(), c));
            }
            rows.push_back(std::move(line));
        }
        if (rc != SQLITE_DONE) {
            throw CorpusError("cannot read sample rows of '" + r.table->name + "' in '" + catalog.db_id() +
                              "': " + sqlite3_errmsg(db.get()));
        }
        if (rows.empty()) continue;

        out += "\n/* " + std::to_string(rows.size()) + " example row" + (rows.size() == 1 ? "" : "s") +
               " from table " + quote_ident(r.table->name) + ":\n";
        for (std::size_t c = 0; c < r.columns.size(); ++c) {
            if (c) out += " | ";
            out += r.columns[c]->name;
        }
        out += "\n";
        for (const auto& row : rows) out += row + "\n";
        out += "*/\n";
    }
    return out;
}

}  // namespace route
