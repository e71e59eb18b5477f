#include "route/sqlkit.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>

#include "route/identifier.hpp"
#include "route/util.hpp"

namespace route {

namespace {

constexpr MatchStage kStages[] = {MatchStage::Exact, MatchStage::Unquoted, MatchStage::Fuzzy};

struct ResolvedSource {
    const SourceRef* ref = nullptr;
    const TableSchema* table = nullptr;  // null for derived, CTE, function or unresolved sources
};

struct ScopeInfo {
    std::vector<ResolvedSource> sources;
    bool has_unresolved = false;
};

class Extractor {
  public:
    Extractor(const ParsedQuery& parsed, const DatabaseCatalog& catalog, std::string_view pair_id)
        : parsed_(parsed), catalog_(catalog), pair_id_(pair_id), table_names_(catalog.table_names()) {
        result_.subset.set_db_id(catalog.db_id());
    }

    Extraction run() {
        infos_.resize(parsed_.scopes.size());
        for (std::size_t i = 0; i < parsed_.scopes.size(); ++i) resolve_sources(i);
        for (std::size_t i = 0; i < parsed_.scopes.size(); ++i) resolve_columns(i);
        return std::move(result_);
    }

  private:
    const ParsedQuery& parsed_;
    const DatabaseCatalog& catalog_;
    std::string pair_id_;
    std::vector<std::string> table_names_;
    std::vector<ScopeInfo> infos_;
    Extraction result_;

    void warn(std::string identifier, std::string reason) {
        result_.warnings.push_back(Warning{pair_id_, std::move(identifier), std::move(reason)});
    }

    const Scope& scope(std::size_t i) const { return parsed_.scopes[i]; }

    void resolve_sources(std::size_t si) {
        auto& info = infos_[si];
        for (const auto& src : scope(si).sources) {
            ResolvedSource rs{&src, nullptr};
            if (src.physical()) {
                if (auto idx = resolve_identifier(src.name, table_names_)) {
                    rs.table = &catalog_.tables()[*idx];
                    result_.subset.add_table(rs.table->name);
                } else {
                    info.has_unresolved = true;
                    warn(src.name, "unknown table");
                }
            }
            info.sources.push_back(rs);
        }
        for (const auto& src : scope(si).sources) {
            for (const auto& col : src.using_columns) add_using_column(si, col);
        }
        if (scope(si).count_star) {
            for (const auto& rs : info.sources) {
                if (!rs.table) continue;
                for (const auto& pk : rs.table->primary_keys) result_.subset.add_column(rs.table->name, pk);
            }
        }
    }

    void add_using_column(std::size_t si, const std::string& column) {
        bool found = false;
        for (const auto& rs : infos_[si].sources) {
            if (!rs.table) continue;
            if (const Column* c = rs.table->find_column(column)) {
                result_.subset.add_column(rs.table->name, c->name);
                found = true;
            }
        }
        if (!found && !infos_[si].has_unresolved && !uses_derived(si)) warn(column, "unknown USING column");
    }

    bool uses_derived(std::size_t si) const {
        return std::any_of(infos_[si].sources.begin(), infos_[si].sources.end(),
                           [](const ResolvedSource& rs) { return !rs.ref->physical(); });
    }

    /// Output column names of a derived source (FROM subquery or CTE body).
    std::optional<std::vector<std::string>> derived_outputs(const SourceRef& src) const {
        if (src.derived_scope < 0) return std::nullopt;
        const Scope& d = scope(static_cast<std::size_t>(src.derived_scope));
        if (d.output_has_star) return std::nullopt;  // unknown column list, accept anything
        return d.output_names;
    }

    void add_all_columns(const TableSchema& table) {
        for (const auto& c : table.columns) result_.subset.add_column(table.name, c.name);
    }

    void resolve_columns(std::size_t si) {
        for (const auto& ref : scope(si).columns) {
            if (ref.star) {
                resolve_star(si, ref);
            } else if (!ref.qualifier.empty()) {
                resolve_qualified(si, ref);
            } else {
                resolve_unqualified(si, ref);
            }
        }
    }

    void resolve_star(std::size_t si, const ColumnRef& ref) {
        if (ref.qualifier.empty()) {
            for (const auto& rs : infos_[si].sources) {
                if (rs.table) add_all_columns(*rs.table);
            }
            return;
        }
        if (const ResolvedSource* rs = find_qualifier(si, ref.qualifier)) {
            if (rs->table) add_all_columns(*rs->table);
            return;
        }
        if (!any_unresolved(si)) warn(ref.qualifier, "unknown qualifier");
    }

    bool any_unresolved(std::size_t si) const {
        for (int s = static_cast<int>(si); s >= 0; s = scope(static_cast<std::size_t>(s)).parent) {
            if (infos_[static_cast<std::size_t>(s)].has_unresolved) return true;
        }
        return false;
    }

    /// Source whose alias (or name) matches `qualifier`, searching outward.
    const ResolvedSource* find_qualifier(std::size_t si, std::string_view qualifier) const {
        for (MatchStage stage : kStages) {
            for (int s = static_cast<int>(si); s >= 0; s = scope(static_cast<std::size_t>(s)).parent) {
                for (const auto& rs : infos_[static_cast<std::size_t>(s)].sources) {
                    if (matches_at(stage, qualifier, rs.ref->visible_name())) return &rs;
                }
                for (const auto& rs : infos_[static_cast<std::size_t>(s)].sources) {
                    if (!rs.ref->alias.empty() && !rs.ref->name.empty() && matches_at(stage, qualifier, rs.ref->name))
                        return &rs;
                }
            }
        }
        return nullptr;
    }

    void resolve_qualified(std::size_t si, const ColumnRef& ref) {
        const ResolvedSource* rs = find_qualifier(si, ref.qualifier);
        if (!rs) {
            if (!any_unresolved(si)) warn(ref.qualifier + "." + ref.name, "unknown qualifier");
            return;
        }
        if (!rs->table) return;  // unresolved table (already reported) or derived source
        auto names = rs->table->column_names();
        if (auto idx = resolve_identifier(ref.name, names)) {
            result_.subset.add_column(rs->table->name, names[*idx]);
        } else {
            warn(ref.qualifier + "." + ref.name, "unknown column");
        }
    }

    void resolve_unqualified(std::size_t si, const ColumnRef& ref) {
        const Scope& sc = scope(si);
        if (ref.clause == Clause::OrderBy && matches_alias(sc, ref.name)) return;

        for (MatchStage stage : kStages) {
            for (int s = static_cast<int>(si); s >= 0; s = scope(static_cast<std::size_t>(s)).parent) {
                const auto& info = infos_[static_cast<std::size_t>(s)];
                const TableSchema* owner = nullptr;
                const Column* column = nullptr;
                std::set<const TableSchema*> owners;
                bool derived_hit = false;
                for (const auto& rs : info.sources) {
                    if (rs.table) {
                        for (const auto& c : rs.table->columns) {
                            if (!matches_at(stage, ref.name, c.name)) continue;
                            if (!owner) {
                                owner = rs.table;
                                column = &c;
                            }
                            owners.insert(rs.table);
                            break;
                        }
                    } else if (auto outputs = derived_outputs(*rs.ref)) {
                        for (const auto& o : *outputs) {
                            if (matches_at(stage, ref.name, o)) derived_hit = true;
                        }
                    } else if (rs.ref->derived_scope >= 0 && stage == MatchStage::Exact) {
                        derived_hit = true;  // star output: assume it provides the column
                    }
                }
                if (owner) {
                    result_.subset.add_column(owner->name, column->name);
                    if (owners.size() > 1 && !is_using_column(s, ref.name)) warn(ref.name, "ambiguous column");
                    return;
                }
                if (derived_hit) return;
            }
        }
        if (matches_alias(sc, ref.name)) return;
        if (ref.double_quoted) return;  // SQLite reads an unmatched "..." as a string literal
        if (any_unresolved(si)) return;
        warn(ref.name, "unknown column");
    }

    bool matches_alias(const Scope& sc, std::string_view name) const {
        return std::any_of(sc.aliases.begin(), sc.aliases.end(),
                           [&](const std::string& o) { return ident_equal(o, name); });
    }

    bool is_using_column(int s, std::string_view name) const {
        for (const auto& src : scope(static_cast<std::size_t>(s)).sources) {
            for (const auto& c : src.using_columns) {
                if (ident_equal(c, name)) return true;
            }
        }
        return false;
    }
};

std::vector<Token> lex(const SqlQuery& sql) { return tokenize(sql.text); }

}  // namespace

Extraction extract_schema_elements(const ParsedQuery& parsed, const DatabaseCatalog& catalog,
                                   std::string_view pair_id) {
    return Extractor(parsed, catalog, pair_id).run();
}

Extraction extract_schema_elements(const SqlQuery& sql, const DatabaseCatalog& catalog, std::string_view pair_id) {
    if (sql.empty()) throw SqlParseError("empty statement", 0);
    ParsedQuery parsed = parse_sql(sql.text);
    return extract_schema_elements(parsed, catalog, pair_id);
}

std::string_view to_string(HardnessLevel level) {
    switch (level) {
        case HardnessLevel::Simple:
            return "simple";
        case HardnessLevel::Medium:
            return "medium";
        case HardnessLevel::Hard:
            return "hard";
    }
    return "unknown";
}

HardnessLevel difficulty(const SqlQuery& sql, const DatabaseCatalog& catalog) {
    if (sql.empty()) throw SqlParseError("empty statement", 0);
    ParsedQuery parsed = parse_sql(sql.text);
    auto names = catalog.table_names();
    std::set<std::string> tables;
    for (const auto& sc : parsed.scopes) {
        for (const auto& src : sc.sources) {
            if (!src.physical()) continue;
            if (auto idx = resolve_identifier(src.name, names)) {
                tables.insert(to_lower(names[*idx]));
            } else {
                tables.insert(to_lower(strip_quotes(src.name)));
            }
        }
    }
    std::size_t n = std::clamp<std::size_t>(tables.size(), 1, 3);
    return static_cast<HardnessLevel>(static_cast<int>(n));
}

std::size_t token_count(const SqlQuery& sql) { return lex(sql).size(); }

std::string truncate_at(const SqlQuery& sql, std::size_t k) {
    auto tokens = lex(sql);
    if (k == 0 || k > tokens.size()) {
        throw SqlError("truncation point " + std::to_string(k) + " outside 1.." + std::to_string(tokens.size()));
    }
    return sql.text.substr(0, tokens[k - 1].end());
}

std::size_t choose_truncation_point(std::size_t token_count, std::uint64_t seed) {
    if (token_count < 2) throw SqlError("query needs at least two tokens to truncate");
    std::mt19937_64 gen(seed);
    return 1 + static_cast<std::size_t>(uniform_below(gen, token_count - 1));
}

std::string truncate_random(const SqlQuery& sql, std::uint64_t seed) {
    auto tokens = lex(sql);
    std::size_t k = choose_truncation_point(tokens.size(), seed);
    return sql.text.substr(0, tokens[k - 1].end());
}

std::string_view to_string(RefinementStrategy strategy) {
    return strategy == RefinementStrategy::SelectOnly ? "select-only" : "half-prefix";
}

RefinementStrategy parse_refinement_strategy(std::string_view text) {
    if (ident_equal(text, "select-only")) return RefinementStrategy::SelectOnly;
    if (ident_equal(text, "half-prefix")) return RefinementStrategy::HalfPrefix;
    throw std::invalid_argument("unknown refinement strategy: " + std::string(text));
}

std::string truncate_for_refinement(const SqlQuery& sql, RefinementStrategy strategy) {
    if (strategy == RefinementStrategy::SelectOnly) return "SELECT";
    std::vector<Token> tokens;
    try {
        tokens = lex(sql);
    } catch (const SqlParseError&) {
        return "SELECT";
    }
    if (tokens.empty() || !(tokens.front().is("SELECT") || tokens.front().is("WITH"))) return "SELECT";
    std::size_t k = (tokens.size() + 1) / 2;
    return sql.text.substr(0, tokens[k - 1].end());
}

}  // namespace route
