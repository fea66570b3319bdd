#include "lorma/toml.hpp"

#include <cctype>
#include <charconv>
#include <sstream>
#include <vector>

#include "lorma/errors.hpp"

namespace lorma {

namespace {

struct Cursor {
    const std::string& line;
    std::size_t pos = 0;
    int line_no = 1;

    int col() const { return static_cast<int>(pos) + 1; }
    bool done() const { return pos >= line.size() || line[pos] == '#'; }
    char peek() const { return pos < line.size() ? line[pos] : '\0'; }

    void skip_ws() {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what, line_no, col());
    }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_bare_key(Cursor& cur) {
    const std::size_t start = cur.pos;
    while (cur.pos < cur.line.size() && is_bare_key_char(cur.line[cur.pos])) ++cur.pos;
    if (cur.pos == start) cur.fail("expected a key");
    return cur.line.substr(start, cur.pos - start);
}

std::vector<std::string> parse_key_path(Cursor& cur) {
    std::vector<std::string> path{parse_bare_key(cur)};
    while (cur.peek() == '.') {
        ++cur.pos;
        path.push_back(parse_bare_key(cur));
    }
    return path;
}

nlohmann::json parse_value(Cursor& cur);

nlohmann::json parse_string(Cursor& cur) {
    ++cur.pos;  // opening quote
    std::string out;
    while (cur.pos < cur.line.size()) {
        const char c = cur.line[cur.pos];
        if (c == '"') {
            ++cur.pos;
            return out;
        }
        if (c == '\\') {
            ++cur.pos;
            if (cur.pos >= cur.line.size()) cur.fail("dangling escape in string");
            switch (cur.line[cur.pos]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: cur.fail("unsupported escape in string");
            }
            ++cur.pos;
            continue;
        }
        out.push_back(c);
        ++cur.pos;
    }
    cur.fail("unterminated string");
}

nlohmann::json parse_array(Cursor& cur) {
    ++cur.pos;  // '['
    nlohmann::json out = nlohmann::json::array();
    cur.skip_ws();
    if (cur.peek() == ']') {
        ++cur.pos;
        return out;
    }
    for (;;) {
        cur.skip_ws();
        out.push_back(parse_value(cur));
        cur.skip_ws();
        if (cur.peek() == ',') {
            ++cur.pos;
            continue;
        }
        if (cur.peek() == ']') {
            ++cur.pos;
            return out;
        }
        cur.fail("expected ',' or ']' in array");
    }
}

nlohmann::json parse_number(Cursor& cur) {
    const std::size_t start = cur.pos;
    bool is_float = false;
    if (cur.peek() == '+' || cur.peek() == '-') ++cur.pos;
    while (cur.pos < cur.line.size()) {
        const char c = cur.line[cur.pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '_') {
            ++cur.pos;
        } else if (c == '.' || c == 'e' || c == 'E') {
            is_float = true;
            ++cur.pos;
            if (cur.peek() == '+' || cur.peek() == '-') ++cur.pos;
        } else {
            break;
        }
    }
    std::string digits = cur.line.substr(start, cur.pos - start);
    std::erase(digits, '_');
    if (is_float) {
        double v = 0.0;
        const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) {
            cur.fail("malformed number '" + digits + "'");
        }
        return v;
    }
    long long v = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) {
        cur.fail("malformed integer '" + digits + "'");
    }
    return v;
}

nlohmann::json parse_value(Cursor& cur) {
    cur.skip_ws();
    const char c = cur.peek();
    if (c == '"') return parse_string(cur);
    if (c == '[') return parse_array(cur);
    if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::string word = parse_bare_key(cur);
        if (word == "true") return true;
        if (word == "false") return false;
        cur.fail("unknown literal '" + word + "'");
    }
    if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
        return parse_number(cur);
    }
    cur.fail("expected a value");
}

nlohmann::json* descend(nlohmann::json& root, const std::vector<std::string>& path,
                        Cursor& cur) {
    nlohmann::json* node = &root;
    for (const auto& part : path) {
        if (node->is_array()) node = &node->back();
        if (!node->is_object()) cur.fail("key path collides with a value");
        node = &(*node)[part];
    }
    if (node->is_array()) node = &node->back();
    return node;
}

}  // namespace

nlohmann::json parse_toml(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;

    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        Cursor cur{line, 0, line_no};
        cur.skip_ws();
        if (cur.done()) continue;

        if (cur.peek() == '[') {
            ++cur.pos;
            const bool is_array = cur.peek() == '[';
            if (is_array) ++cur.pos;
            cur.skip_ws();
            const auto path = parse_key_path(cur);
            cur.skip_ws();
            if (cur.peek() != ']') cur.fail("expected ']' after table name");
            ++cur.pos;
            if (is_array) {
                if (cur.peek() != ']') cur.fail("expected ']]' after table-array name");
                ++cur.pos;
            }
            cur.skip_ws();
            if (!cur.done()) cur.fail("trailing characters after table header");

            nlohmann::json* parent = &root;
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                if (parent->is_array()) parent = &parent->back();
                parent = &(*parent)[path[i]];
            }
            if (parent->is_array()) parent = &parent->back();
            nlohmann::json& slot = (*parent)[path.back()];
            if (is_array) {
                if (slot.is_null()) slot = nlohmann::json::array();
                if (!slot.is_array()) cur.fail("redefinition of table as array");
                slot.push_back(nlohmann::json::object());
                table = &slot.back();
            } else {
                if (slot.is_null()) slot = nlohmann::json::object();
                if (!slot.is_object()) cur.fail("redefinition of key as table");
                table = &slot;
            }
            continue;
        }

        const auto key_path = parse_key_path(cur);
        cur.skip_ws();
        if (cur.peek() != '=') cur.fail("expected '=' after key");
        ++cur.pos;
        cur.skip_ws();
        const nlohmann::json value = parse_value(cur);
        cur.skip_ws();
        if (!cur.done()) cur.fail("trailing characters after value");

        nlohmann::json* target = table;
        if (key_path.size() > 1) {
            const std::vector<std::string> prefix(key_path.begin(), key_path.end() - 1);
            target = descend(*table, prefix, cur);
        }
        if (target->contains(key_path.back())) {
            cur.fail("duplicate key '" + key_path.back() + "'");
        }
        (*target)[key_path.back()] = value;
    }
    return root;
}

}  // namespace lorma
