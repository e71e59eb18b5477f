#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace route {

struct Blob {
    std::string bytes;
    friend bool operator==(const Blob&, const Blob&) = default;
};

/// One SQLite scalar: NULL, INTEGER, REAL, TEXT or BLOB.
using Value = std::variant<std::monostate, std::int64_t, double, std::string, Blob>;
using Row = std::vector<Value>;

/// Deterministic display form: NULL, shortest round-trip numbers, text with
/// non-printable bytes written as \xHH, blobs as X'..'.
std::string format_value(const Value& value);

/// Hex-escapes ASCII control bytes (and DEL); everything else is kept.
std::string escape_nonprintable(std::string_view text);

}  // namespace route
