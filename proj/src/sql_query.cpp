#include "route/sql_query.hpp"

#include <cctype>

namespace route {

std::string_view to_string(SqlOrigin origin) {
    switch (origin) {
        case SqlOrigin::Gold:
            return "gold";
        case SqlOrigin::Predicted:
            return "predicted";
        case SqlOrigin::Corrected:
            return "corrected";
        case SqlOrigin::Continued:
            return "continued";
        case SqlOrigin::Injected:
            return "injected";
    }
    return "unknown";
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string_view strip_fences(std::string_view s) {
    s = trim(s);
    if (s.starts_with("```")) {
        auto nl = s.find('\n');
        s = nl == std::string_view::npos ? std::string_view{} : s.substr(nl + 1);
        s = trim(s);
    }
    if (s.ends_with("```")) {
        s.remove_suffix(3);
        s = trim(s);
    }
    return s;
}

}  // namespace

SqlQuery normalize(std::string_view sql, SqlOrigin origin) {
    std::string_view src = strip_fences(sql);
    std::string out;
    out.reserve(src.size());
    bool pending_space = false;
    std::size_t i = 0;
    const std::size_t n = src.size();

    auto emit_space = [&] {
        if (pending_space && !out.empty()) out += ' ';
        pending_space = false;
    };

    while (i < n) {
        char c = src[i];
        if (is_space(c)) {
            pending_space = true;
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < n && src[i + 1] == '-') {
            while (i < n && src[i] != '\n') ++i;
            pending_space = true;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            auto end = src.find("*/", i + 2);
            i = end == std::string_view::npos ? n : end + 2;
            pending_space = true;
            continue;
        }
        emit_space();
        if (c == '\'' || c == '"' || c == '`' || c == '[') {
            char close = c == '[' ? ']' : c;
            std::size_t j = i + 1;
            while (j < n) {
                if (src[j] == close) {
                    if (close != ']' && j + 1 < n && src[j + 1] == close) {
                        j += 2;
                        continue;
                    }
                    ++j;
                    break;
                }
                ++j;
            }
            out.append(src.substr(i, std::min(j, n) - i));
            i = std::min(j, n);
            continue;
        }
        out += c;
        ++i;
    }

    for (;;) {
        while (!out.empty() && is_space(out.back())) out.pop_back();
        if (!out.empty() && out.back() == ';') {
            out.pop_back();
            continue;
        }
        break;
    }
    if (out.empty()) throw SqlError("empty SQL");
    return SqlQuery{std::move(out), origin};
}

}  // namespace route
