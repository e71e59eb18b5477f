#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace route {

/// Lower-cases ASCII letters; other bytes pass through untouched.
std::string to_lower(std::string_view s);

/// Removes one layer of SQL identifier quoting: "x", `x` or [x].
std::string_view strip_quotes(std::string_view s);

/// Case-insensitive comparison after quote stripping.
bool ident_equal(std::string_view a, std::string_view b);

/// Ordering used by every name-keyed container: case-insensitive, quote-stripped.
struct IdentLess {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const;
};

/// Levenshtein distance over ASCII-lowered bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Stages of the identifier resolution ladder, tried in order.
enum class MatchStage { Exact, Unquoted, Fuzzy };

/// Minimum unquoted length for the fuzzy stage; shorter names only match exactly.
inline constexpr std::size_t kFuzzyMinLength = 3;

bool matches_at(MatchStage stage, std::string_view raw, std::string_view candidate);

/// Resolves `raw` against `candidates`: exact case-insensitive, then
/// quote-stripped, then edit distance <= 1. The first candidate in declaration
/// order wins within a stage.
std::optional<std::size_t> resolve_identifier(std::string_view raw,
                                              std::span<const std::string> candidates,
                                              MatchStage* stage = nullptr);

}  // namespace route
