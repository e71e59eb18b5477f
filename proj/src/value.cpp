#include "route/value.hpp"

#include <charconv>
#include <cstdio>

namespace route {

namespace {

constexpr char kHex[] = "0123456789ABCDEF";

}  // namespace

std::string escape_nonprintable(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (c < 0x20 || c == 0x7F) {
            out += "\\x";
            out += kHex[c >> 4];
            out += kHex[c & 0xF];
        } else {
            out += ch;
        }
    }
    return out;
}

std::string format_value(const Value& value) {
    struct Visitor {
        std::string operator()(std::monostate) const { return "NULL"; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const {
            char buf[64];
            auto res = std::to_chars(buf, buf + sizeof(buf), v);
            std::string s(buf, res.ptr);
            if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
            return s;
        }
        std::string operator()(const std::string& v) const { return escape_nonprintable(v); }
        std::string operator()(const Blob& v) const {
            std::string s = "X'";
            for (char ch : v.bytes) {
                auto c = static_cast<unsigned char>(ch);
                s += kHex[c >> 4];
                s += kHex[c & 0xF];
            }
            return s + "'";
        }
    };
    return std::visit(Visitor{}, value);
}

}  // namespace route
