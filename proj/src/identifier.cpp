#include "route/identifier.hpp"

#include <algorithm>
#include <vector>

namespace route {

namespace {

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

std::string_view strip_quotes(std::string_view s) {
    if (s.size() >= 2) {
        char open = s.front();
        char close = s.back();
        if ((open == '"' && close == '"') || (open == '`' && close == '`') || (open == '[' && close == ']')) {
            return s.substr(1, s.size() - 2);
        }
    }
    return s;
}

bool ident_equal(std::string_view a, std::string_view b) {
    a = strip_quotes(a);
    b = strip_quotes(b);
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (lower(a[i]) != lower(b[i])) return false;
    }
    return true;
}

bool IdentLess::operator()(std::string_view a, std::string_view b) const {
    a = strip_quotes(a);
    b = strip_quotes(b);
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [](char x, char y) { return lower(x) < lower(y); });
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t subst = prev[j - 1] + (lower(a[i - 1]) == lower(b[j - 1]) ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

bool matches_at(MatchStage stage, std::string_view raw, std::string_view candidate) {
    switch (stage) {
        case MatchStage::Exact: {
            if (raw.size() != candidate.size()) return false;
            for (std::size_t i = 0; i < raw.size(); ++i) {
                if (lower(raw[i]) != lower(candidate[i])) return false;
            }
            return true;
        }
        case MatchStage::Unquoted:
            return ident_equal(raw, candidate);
        case MatchStage::Fuzzy: {
            auto r = strip_quotes(raw);
            auto c = strip_quotes(candidate);
            if (r.size() < kFuzzyMinLength || c.size() < kFuzzyMinLength) return false;
            if (r.size() > c.size() + 1 || c.size() > r.size() + 1) return false;
            return edit_distance(r, c) <= 1;
        }
    }
    return false;
}

std::optional<std::size_t> resolve_identifier(std::string_view raw, std::span<const std::string> candidates,
                                              MatchStage* stage) {
    for (auto s : {MatchStage::Exact, MatchStage::Unquoted, MatchStage::Fuzzy}) {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (matches_at(s, raw, candidates[i])) {
                if (stage) *stage = s;
                return i;
            }
        }
    }
    return std::nullopt;
}

}  // namespace route
