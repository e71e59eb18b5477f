#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace route {

/// Structured parse failure: message plus byte offset into the input.
class SqlParseError : public std::runtime_error {
  public:
    SqlParseError(const std::string& message, std::size_t offset)
        : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
};

enum class TokenKind {
    Word,         // keyword or bare identifier
    QuotedIdent,  // "x", `x`, [x]
    String,       // 'x'
    Number,
    Blob,   // X'..'
    Param,  // ?, ?1, :name, @name, $name
    Operator,
    LParen,
    RParen,
    Comma,
    Dot,
    Semicolon,
};

struct Token {
    TokenKind kind;
    std::string text;  // raw source bytes, quotes included
    std::size_t offset;

    std::size_t end() const { return offset + text.size(); }
    /// Case-insensitive keyword test (Word tokens only).
    bool is(std::string_view keyword) const;
    bool is_op(std::string_view op) const { return kind == TokenKind::Operator && text == op; }
};

/// Splits SQL into tokens, dropping whitespace and comments.
/// Throws SqlParseError on unterminated literals or stray bytes.
std::vector<Token> tokenize(std::string_view sql);

}  // namespace route
