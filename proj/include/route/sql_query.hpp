#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace route {

enum class SqlOrigin { Gold, Predicted, Corrected, Continued, Injected };

std::string_view to_string(SqlOrigin origin);

/// Normalized SQL text with its provenance. An empty text is the "no SQL"
/// marker produced when extraction from a model response fails; executing it
/// always yields an error outcome.
struct SqlQuery {
    std::string text;
    SqlOrigin origin = SqlOrigin::Predicted;

    bool empty() const { return text.empty(); }
    friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

class SqlError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Collapses whitespace and strips comments outside literals, code-fence
/// markers and trailing semicolons. Literal contents are kept byte-exact.
/// Throws SqlError if nothing remains.
SqlQuery normalize(std::string_view sql, SqlOrigin origin = SqlOrigin::Predicted);

}  // namespace route
