#include "route/sql_lexer.hpp"

#include <cctype>

#include "route/identifier.hpp"

namespace route {

bool Token::is(std::string_view keyword) const {
    if (kind != TokenKind::Word || text.size() != keyword.size()) return false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(text[i])) != std::toupper(static_cast<unsigned char>(keyword[i])))
            return false;
    }
    return true;
}

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_part(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

/// Returns the index one past the closing `close`, honouring doubled escapes.
std::size_t scan_quoted(std::string_view s, std::size_t start, char close, bool doubled_escape) {
    std::size_t i = start + 1;
    while (i < s.size()) {
        if (s[i] == close) {
            if (doubled_escape && i + 1 < s.size() && s[i + 1] == close) {
                i += 2;
                continue;
            }
            return i + 1;
        }
        ++i;
    }
    throw SqlParseError("unterminated literal", start);
}

}  // namespace

std::vector<Token> tokenize(std::string_view sql) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = sql.size();
    auto push = [&](TokenKind kind, std::size_t begin, std::size_t end) {
        out.push_back(Token{kind, std::string(sql.substr(begin, end - begin)), begin});
        i = end;
    };

    while (i < n) {
        auto c = static_cast<unsigned char>(sql[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            auto end = sql.find("*/", i + 2);
            i = (end == std::string_view::npos) ? n : end + 2;
            continue;
        }
        if (c == '\'') {
            push(TokenKind::String, i, scan_quoted(sql, i, '\'', true));
            continue;
        }
        if (c == '"') {
            push(TokenKind::QuotedIdent, i, scan_quoted(sql, i, '"', true));
            continue;
        }
        if (c == '`') {
            push(TokenKind::QuotedIdent, i, scan_quoted(sql, i, '`', true));
            continue;
        }
        if (c == '[') {
            push(TokenKind::QuotedIdent, i, scan_quoted(sql, i, ']', false));
            continue;
        }
        if ((c == 'x' || c == 'X') && i + 1 < n && sql[i + 1] == '\'') {
            push(TokenKind::Blob, i, scan_quoted(sql, i + 1, '\'', false));
            continue;
        }
        if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            std::size_t j = i;
            if (c == '0' && j + 1 < n && (sql[j + 1] == 'x' || sql[j + 1] == 'X')) {
                j += 2;
                while (j < n && std::isxdigit(static_cast<unsigned char>(sql[j]))) ++j;
            } else {
                while (j < n && (std::isdigit(static_cast<unsigned char>(sql[j])) || sql[j] == '_')) ++j;
                if (j < n && sql[j] == '.') {
                    ++j;
                    while (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) ++j;
                }
                if (j < n && (sql[j] == 'e' || sql[j] == 'E')) {
                    std::size_t k = j + 1;
                    if (k < n && (sql[k] == '+' || sql[k] == '-')) ++k;
                    if (k < n && std::isdigit(static_cast<unsigned char>(sql[k]))) {
                        j = k;
                        while (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) ++j;
                    }
                }
            }
            push(TokenKind::Number, i, j);
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i + 1;
            while (j < n && ident_part(static_cast<unsigned char>(sql[j]))) ++j;
            push(TokenKind::Word, i, j);
            continue;
        }
        if (c == '?') {
            std::size_t j = i + 1;
            while (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) ++j;
            push(TokenKind::Param, i, j);
            continue;
        }
        if ((c == ':' || c == '@' || c == '$') && i + 1 < n && ident_part(static_cast<unsigned char>(sql[i + 1]))) {
            std::size_t j = i + 1;
            while (j < n && ident_part(static_cast<unsigned char>(sql[j]))) ++j;
            push(TokenKind::Param, i, j);
            continue;
        }
        switch (c) {
            case '(':
                push(TokenKind::LParen, i, i + 1);
                continue;
            case ')':
                push(TokenKind::RParen, i, i + 1);
                continue;
            case ',':
                push(TokenKind::Comma, i, i + 1);
                continue;
            case '.':
                push(TokenKind::Dot, i, i + 1);
                continue;
            case ';':
                push(TokenKind::Semicolon, i, i + 1);
                continue;
            default:
                break;
        }
        static constexpr std::string_view kOps[] = {"->>", "||", "->", "<<", ">>", "<=", ">=", "==", "!=", "<>",
                                                    "=",   "<",  ">",  "+",  "-",  "*",  "/",  "%",  "&",  "|",
                                                    "~"};
        bool matched = false;
        for (auto op : kOps) {
            if (sql.substr(i, op.size()) == op) {
                push(TokenKind::Operator, i, i + op.size());
                matched = true;
                break;
            }
        }
        if (!matched) throw SqlParseError(std::string("unexpected character '") + sql[i] + "'", i);
    }
    return out;
}

}  // namespace route
