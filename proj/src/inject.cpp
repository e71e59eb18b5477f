#include <algorithm>
#include <cctype>
#include <functional>

#include "route/identifier.hpp"
#include "route/sql_parser.hpp"
#include "route/synth.hpp"
#include "route/util.hpp"

namespace route {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SchemaLinking:
            return "schema_linking";
        case ErrorKind::Nesting:
            return "nesting";
        case ErrorKind::Join:
            return "join";
        case ErrorKind::GroupBy:
            return "group_by";
        case ErrorKind::Symbol:
            return "symbol";
    }
    return "unknown";
}

ErrorKind parse_error_kind(std::string_view text) {
    for (auto k : kAllErrorKinds) {
        if (ident_equal(text, to_string(k))) return k;
    }
    throw std::invalid_argument("unknown error kind: " + std::string(text));
}

namespace {

constexpr std::pair<std::string_view, std::string_view> kSynonyms[] = {
    {"name", "title"},     {"id", "code"},         {"date", "time"},     {"count", "number"},
    {"city", "town"},      {"country", "nation"},  {"price", "cost"},    {"salary", "wage"},
    {"type", "kind"},      {"age", "years"},       {"votes", "ballots"}, {"text", "content"},
    {"description", "summary"}, {"state", "province"}, {"party", "faction"}, {"place", "rank"},
};

constexpr std::string_view kAggregates[] = {"COUNT", "MAX", "MIN", "SUM", "AVG"};

constexpr std::string_view kStructuralKeywords[] = {"SELECT", "FROM",  "WHERE",  "GROUP", "ORDER", "JOIN",
                                                    "HAVING", "LIMIT", "UNION",  "BY",    "AS",    "ON",
                                                    "INNER",  "LEFT",  "EXCEPT", "INTERSECT", "DISTINCT", "WITH"};

struct Edit {
    std::size_t begin = 0;  // byte range of the normalized text to replace
    std::size_t end = 0;
    std::string replacement;
};

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(uniform_below(rng, n)); }

template <typename T>
const T& pick_from(std::mt19937_64& rng, const std::vector<T>& items) {
    return items[pick(rng, items.size())];
}

/// Re-applies the quoting style of `raw` to `inner`.
std::string requote(std::string_view raw, std::string_view inner) {
    if (raw.size() >= 2 && (raw.front() == '"' || raw.front() == '`' || raw.front() == '[')) {
        return std::string(1, raw.front()) + std::string(inner) + std::string(1, raw.back());
    }
    return std::string(inner);
}

std::string typo(std::string_view word, std::mt19937_64& rng) {
    std::string w(word);
    for (int tries = 0; tries < 16; ++tries) {
        std::string t = w;
        switch (pick(rng, t.size() >= 2 ? 4 : 2)) {
            case 0: {
                std::size_t i = pick(rng, t.size());
                t.insert(i, 1, t[i]);
                break;
            }
            case 1: {
                std::size_t i = pick(rng, t.size());
                char c = t[i];
                char repl = std::isalpha(static_cast<unsigned char>(c)) ? static_cast<char>('a' + (std::tolower(c) - 'a' + 1) % 26) : 'x';
                t[i] = std::isupper(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(repl)) : repl;
                break;
            }
            case 2:
                t.erase(pick(rng, t.size()), 1);
                break;
            default: {
                std::size_t i = pick(rng, t.size() - 1);
                std::swap(t[i], t[i + 1]);
                break;
            }
        }
        if (!t.empty() && !ident_equal(t, w)) return t;
    }
    return w + "x";
}

std::string match_case(std::string_view model, std::string_view word) {
    std::string out(word);
    bool all_upper = std::all_of(model.begin(), model.end(), [](unsigned char c) { return !std::islower(c); });
    if (all_upper) {
        for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    } else if (!model.empty() && std::isupper(static_cast<unsigned char>(model.front()))) {
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    }
    return out;
}

/// Replaces one underscore-separated part of `name` with a synonym, if any part has one.
std::optional<std::string> synonym(std::string_view name, std::mt19937_64& rng) {
    struct Site {
        std::size_t begin, len;
        std::string_view replacement;
    };
    std::vector<Site> sites;
    std::size_t start = 0;
    while (start <= name.size()) {
        auto sep = name.find_first_of("_ ", start);
        std::size_t end = sep == std::string_view::npos ? name.size() : sep;
        std::string part = to_lower(name.substr(start, end - start));
        for (auto [a, b] : kSynonyms) {
            if (part == a) sites.push_back({start, end - start, b});
            if (part == b) sites.push_back({start, end - start, a});
        }
        if (sep == std::string_view::npos) break;
        start = sep + 1;
    }
    if (sites.empty()) return std::nullopt;
    const Site& s = pick_from(rng, sites);
    std::string out(name);
    out.replace(s.begin, s.len, match_case(name.substr(s.begin, s.len), s.replacement));
    return out;
}

bool has_synonym(std::string_view name) {
    std::mt19937_64 rng(0);
    return synonym(name, rng).has_value();
}

struct ColumnSite {
    std::size_t token;
    const TableSchema* table;
    std::string column;  // canonical column name
    Clause clause;
};

struct TableSite {
    std::size_t token;
    const TableSchema* table;
    bool joined;
};

/// Token-level view of a query with each reference resolved to the catalog.
class Sites {
  public:
    Sites(const ParsedQuery& parsed, const DatabaseCatalog& catalog) : parsed_(parsed), catalog_(catalog) {
        for (std::size_t s = 0; s < parsed.scopes.size(); ++s) {
            const Scope& sc = parsed.scopes[s];
            if (sc.sources.size() >= 2) has_join = true;
            for (const auto& src : sc.sources) {
                if (!src.physical()) continue;
                if (const TableSchema* t = catalog.find_table(src.name)) {
                    tables.push_back(TableSite{src.name_token, t, src.joined});
                }
            }
            for (const auto& ref : sc.columns) {
                if (ref.star) continue;
                const TableSchema* t = owner(static_cast<int>(s), ref);
                if (!t) continue;
                const Column* c = t->find_column(ref.name);
                if (!c) continue;
                columns.push_back(ColumnSite{ref.token, t, c->name, ref.clause});
            }
        }
    }

    std::vector<TableSite> tables;
    std::vector<ColumnSite> columns;
    bool has_join = false;

  private:
    const ParsedQuery& parsed_;
    const DatabaseCatalog& catalog_;

    const TableSchema* owner(int s, const ColumnRef& ref) const {
        for (; s >= 0; s = parsed_.scopes[static_cast<std::size_t>(s)].parent) {
            for (const auto& src : parsed_.scopes[static_cast<std::size_t>(s)].sources) {
                if (!src.physical()) continue;
                const TableSchema* t = catalog_.find_table(src.name);
                if (!t) continue;
                if (!ref.qualifier.empty()) {
                    if (ident_equal(ref.qualifier, src.visible_name()) || ident_equal(ref.qualifier, src.name)) return t;
                } else if (t->find_column(ref.name)) {
                    return t;
                }
            }
        }
        return nullptr;
    }
};

std::vector<std::string> other_columns(const TableSchema& table, std::string_view column) {
    std::vector<std::string> out;
    for (const auto& c : table.columns) {
        if (!ident_equal(c.name, column)) out.push_back(c.name);
    }
    return out;
}

using EditMaker = std::function<Edit(std::mt19937_64&)>;

Edit replace_token(const Token& tok, std::string text) { return Edit{tok.offset, tok.end(), std::move(text)}; }

std::vector<EditMaker> schema_linking_edits(const ParsedQuery& p, const Sites& sites) {
    std::vector<EditMaker> out;
    for (const auto& site : sites.columns) {
        const Token& tok = p.tokens[site.token];
        out.push_back([&tok](std::mt19937_64& rng) {
            return replace_token(tok, requote(tok.text, typo(strip_quotes(tok.text), rng)));
        });
        auto others = other_columns(*site.table, site.column);
        if (!others.empty()) {
            out.push_back([&tok, others](std::mt19937_64& rng) {
                return replace_token(tok, requote(tok.text, pick_from(rng, others)));
            });
        }
        if (has_synonym(strip_quotes(tok.text))) {
            out.push_back([&tok](std::mt19937_64& rng) {
                return replace_token(tok, requote(tok.text, *synonym(strip_quotes(tok.text), rng)));
            });
        }
    }
    for (const auto& site : sites.tables) {
        const Token& tok = p.tokens[site.token];
        out.push_back([&tok](std::mt19937_64& rng) {
            return replace_token(tok, requote(tok.text, typo(strip_quotes(tok.text), rng)));
        });
    }
    return out;
}

std::vector<EditMaker> nesting_edits(const ParsedQuery& p) {
    std::vector<EditMaker> out;
    for (const auto& compound : p.compounds) {
        for (std::size_t i = 0; i < compound.cores.size(); ++i) {
            std::size_t first, last;  // token range to drop, inclusive
            if (i == 0) {
                first = compound.cores[0].first;
                last = compound.operators[0].second - 1;
            } else {
                first = compound.operators[i - 1].first;
                last = compound.cores[i].second - 1;
            }
            out.push_back([&p, first, last](std::mt19937_64&) {
                return Edit{p.tokens[first].offset, p.tokens[last].end(), ""};
            });
        }
    }
    return out;
}

std::vector<EditMaker> join_edits(const ParsedQuery& p, const Sites& sites, const DatabaseCatalog& catalog) {
    std::vector<EditMaker> out;
    if (!sites.has_join) return out;
    for (const auto& site : sites.tables) {
        if (!site.joined) continue;
        std::vector<std::string> others;
        for (const auto& t : catalog.tables()) {
            if (&t != site.table) others.push_back(t.name);
        }
        if (others.empty()) continue;
        const Token& tok = p.tokens[site.token];
        out.push_back([&tok, others](std::mt19937_64& rng) { return replace_token(tok, pick_from(rng, others)); });
    }
    for (const auto& site : sites.columns) {
        if (site.clause != Clause::Join) continue;
        auto others = other_columns(*site.table, site.column);
        if (others.empty()) continue;
        const Token& tok = p.tokens[site.token];
        out.push_back([&tok, others](std::mt19937_64& rng) {
            return replace_token(tok, requote(tok.text, pick_from(rng, others)));
        });
    }
    return out;
}

std::vector<EditMaker> group_by_edits(const ParsedQuery& p, const Sites& sites) {
    std::vector<EditMaker> out;
    for (const auto& site : sites.columns) {
        if (site.clause != Clause::GroupBy) continue;
        auto others = other_columns(*site.table, site.column);
        if (others.empty()) continue;
        const Token& tok = p.tokens[site.token];
        out.push_back([&tok, others](std::mt19937_64& rng) {
            return replace_token(tok, requote(tok.text, pick_from(rng, others)));
        });
    }
    return out;
}

std::vector<EditMaker> symbol_edits(const ParsedQuery& p) {
    // One bucket per symbol error family so each family is equally likely.
    std::vector<std::vector<EditMaker>> families(4);
    for (std::size_t i = 0; i < p.tokens.size(); ++i) {
        const Token& tok = p.tokens[i];
        if (tok.kind == TokenKind::Word &&
            std::any_of(std::begin(kStructuralKeywords), std::end(kStructuralKeywords),
                        [&](std::string_view k) { return tok.is(k); })) {
            families[0].push_back([&tok](std::mt19937_64&) {
                return replace_token(tok, tok.text.substr(0, tok.text.size() - 1));
            });
        } else if (tok.kind == TokenKind::Comma) {
            families[1].push_back([&tok](std::mt19937_64&) { return replace_token(tok, ""); });
        } else if (tok.kind == TokenKind::RParen) {
            families[2].push_back([&tok](std::mt19937_64&) { return replace_token(tok, ""); });
        }
    }
    for (std::size_t idx : p.function_tokens) {
        const Token& tok = p.tokens[idx];
        std::vector<std::string> others;
        bool is_aggregate = false;
        for (auto a : kAggregates) {
            if (tok.is(a)) {
                is_aggregate = true;
            } else {
                others.push_back(match_case(tok.text, to_lower(a)));
            }
        }
        if (!is_aggregate) continue;
        families[3].push_back([&tok, others](std::mt19937_64& rng) { return replace_token(tok, pick_from(rng, others)); });
    }
    std::vector<EditMaker> out;
    std::vector<std::size_t> nonempty;
    for (std::size_t f = 0; f < families.size(); ++f) {
        if (!families[f].empty()) nonempty.push_back(f);
    }
    if (nonempty.empty()) return out;
    // Flatten lazily: a single maker that first picks a family, then a site.
    out.push_back([families, nonempty](std::mt19937_64& rng) {
        const auto& fam = families[pick_from(rng, nonempty)];
        return pick_from(rng, fam)(rng);
    });
    return out;
}

std::vector<EditMaker> edits_for(ErrorKind kind, const ParsedQuery& p, const Sites& sites,
                                 const DatabaseCatalog& catalog) {
    switch (kind) {
        case ErrorKind::SchemaLinking:
            return schema_linking_edits(p, sites);
        case ErrorKind::Nesting:
            return nesting_edits(p);
        case ErrorKind::Join:
            return join_edits(p, sites, catalog);
        case ErrorKind::GroupBy:
            return group_by_edits(p, sites);
        case ErrorKind::Symbol:
            return symbol_edits(p);
    }
    return {};
}

}  // namespace

std::optional<SqlQuery> inject_error(const SqlQuery& gold, const DatabaseCatalog& catalog, ErrorKind kind,
                                     std::uint64_t seed) {
    ParsedQuery parsed = parse_sql(gold.text);
    Sites sites(parsed, catalog);
    auto makers = edits_for(kind, parsed, sites, catalog);
    if (makers.empty()) return std::nullopt;
    std::mt19937_64 rng(seed);
    Edit edit = pick_from(rng, makers)(rng);
    std::string text = parsed.text.substr(0, edit.begin) + edit.replacement + parsed.text.substr(edit.end);
    try {
        SqlQuery out = normalize(text, SqlOrigin::Injected);
        if (out.text == gold.text) return std::nullopt;
        return out;
    } catch (const SqlError&) {
        return std::nullopt;
    }
}

std::vector<ErrorKind> applicable_error_kinds(const SqlQuery& gold, const DatabaseCatalog& catalog) {
    ParsedQuery parsed = parse_sql(gold.text);
    Sites sites(parsed, catalog);
    std::vector<ErrorKind> out;
    for (auto kind : kAllErrorKinds) {
        if (!edits_for(kind, parsed, sites, catalog).empty()) out.push_back(kind);
    }
    return out;
}

}  // namespace route
