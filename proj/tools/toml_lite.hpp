#pragma once

// Small TOML subset: [sections], key = scalar | array (one nesting level for
// matrices), # comments. Flat lookup by "section.key". Every key a command
// may consume must be queried through the getters so that leftover keys can
// be rejected afterwards.

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace tomlite {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Value {
    enum class Kind { String, Number, Bool, Array };
    Kind kind = Kind::Number;
    std::string str;
    double num = 0.0;
    bool flag = false;
    std::vector<Value> items;
    int line = 0;
};

class Table {
  public:
    void insert(const std::string& key, Value v) {
        if (values_.count(key))
            throw ParseError("duplicate key '" + key + "' (line " +
                             std::to_string(v.line) + ")");
        values_.emplace(key, std::move(v));
    }

    bool contains(const std::string& key) const { return values_.count(key) > 0; }

    const Value* find(const std::string& key) const {
        touched_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }

    const Value& require(const std::string& key) const {
        const Value* v = find(key);
        if (!v) throw ParseError("missing required key '" + key + "'");
        return *v;
    }

    double number(const std::string& key) const {
        const Value& v = require(key);
        if (v.kind != Value::Kind::Number)
            throw ParseError("key '" + key + "' must be a number (line " +
                             std::to_string(v.line) + ")");
        return v.num;
    }

    double number_or(const std::string& key, double dflt) const {
        return find(key) ? number(key) : dflt;
    }

    std::string text(const std::string& key) const {
        const Value& v = require(key);
        if (v.kind != Value::Kind::String)
            throw ParseError("key '" + key + "' must be a string (line " +
                             std::to_string(v.line) + ")");
        return v.str;
    }

    std::string text_or(const std::string& key, const std::string& dflt) const {
        return find(key) ? text(key) : dflt;
    }

    bool flag_or(const std::string& key, bool dflt) const {
        const Value* v = find(key);
        if (!v) return dflt;
        if (v->kind != Value::Kind::Bool)
            throw ParseError("key '" + key + "' must be a boolean (line " +
                             std::to_string(v->line) + ")");
        return v->flag;
    }

    std::vector<double> numbers(const std::string& key) const {
        const Value& v = require(key);
        if (v.kind != Value::Kind::Array)
            throw ParseError("key '" + key + "' must be an array (line " +
                             std::to_string(v.line) + ")");
        std::vector<double> out;
        for (const Value& e : v.items) {
            if (e.kind != Value::Kind::Number)
                throw ParseError("key '" + key + "' must hold numbers (line " +
                                 std::to_string(v.line) + ")");
            out.push_back(e.num);
        }
        return out;
    }

    std::vector<double> numbers_or(const std::string& key,
                                   std::vector<double> dflt) const {
        return find(key) ? numbers(key) : std::move(dflt);
    }

    std::vector<std::vector<double>> matrix(const std::string& key) const {
        const Value& v = require(key);
        if (v.kind != Value::Kind::Array)
            throw ParseError("key '" + key + "' must be an array of rows (line " +
                             std::to_string(v.line) + ")");
        std::vector<std::vector<double>> out;
        for (const Value& row : v.items) {
            if (row.kind != Value::Kind::Array)
                throw ParseError("key '" + key + "' must hold row arrays (line " +
                                 std::to_string(v.line) + ")");
            out.emplace_back();
            for (const Value& e : row.items) {
                if (e.kind != Value::Kind::Number)
                    throw ParseError("key '" + key + "' must hold numbers (line " +
                                     std::to_string(v.line) + ")");
                out.back().push_back(e.num);
            }
        }
        return out;
    }

    // "inf" string or a number; p-norm indices need both spellings.
    double norm_index(const std::string& key, double dflt) const {
        const Value* v = find(key);
        if (!v) return dflt;
        if (v->kind == Value::Kind::String && (v->str == "inf" || v->str == "Inf"))
            return std::numeric_limits<double>::infinity();
        if (v->kind == Value::Kind::Number) return v->num;
        throw ParseError("key '" + key + "' must be a number or \"inf\" (line " +
                         std::to_string(v->line) + ")");
    }

    // First key that was present in the file but never consumed.
    std::string first_unconsumed() const {
        for (const auto& [key, value] : values_)
            if (!touched_.count(key)) return key;
        return {};
    }

  private:
    std::map<std::string, Value> values_;
    mutable std::set<std::string> touched_;
};

namespace detail {

inline void skip_ws(const std::string& s, std::size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

inline Value parse_value(const std::string& s, std::size_t& i, int line);

inline Value parse_array(const std::string& s, std::size_t& i, int line) {
    Value v;
    v.kind = Value::Kind::Array;
    v.line = line;
    ++i;  // '['
    for (;;) {
        skip_ws(s, i);
        if (i >= s.size()) throw ParseError("unterminated array (line " + std::to_string(line) + ")");
        if (s[i] == ']') {
            ++i;
            return v;
        }
        v.items.push_back(parse_value(s, i, line));
        skip_ws(s, i);
        if (i < s.size() && s[i] == ',') ++i;
    }
}

inline Value parse_value(const std::string& s, std::size_t& i, int line) {
    skip_ws(s, i);
    if (i >= s.size()) throw ParseError("missing value (line " + std::to_string(line) + ")");
    Value v;
    v.line = line;
    if (s[i] == '[') return parse_array(s, i, line);
    if (s[i] == '"') {
        v.kind = Value::Kind::String;
        ++i;
        while (i < s.size() && s[i] != '"') v.str += s[i++];
        if (i >= s.size()) throw ParseError("unterminated string (line " + std::to_string(line) + ")");
        ++i;
        return v;
    }
    std::size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != ']' && s[i] != ' ' && s[i] != '\t') ++i;
    std::string tok = s.substr(start, i - start);
    if (tok == "true" || tok == "false") {
        v.kind = Value::Kind::Bool;
        v.flag = (tok == "true");
        return v;
    }
    if (tok == "inf" || tok == "-inf") {
        v.kind = Value::Kind::Number;
        v.num = tok[0] == '-' ? -std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::infinity();
        return v;
    }
    try {
        std::size_t used = 0;
        v.num = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
        throw ParseError("bad value '" + tok + "' (line " + std::to_string(line) + ")");
    }
    return v;
}

inline std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

}  // namespace detail

inline Table parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    Table table;
    std::string section;
    std::string raw;
    int lineno = 0;
    std::string pending;  // multi-line arrays
    int pending_line = 0;
    std::string pending_key;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = detail::strip_comment(raw);
        std::size_t i = 0;
        detail::skip_ws(line, i);
        if (!pending_key.empty()) {
            pending += line;
            int balance = 0;
            for (char c : pending)
                balance += (c == '[') - (c == ']');
            if (balance > 0) continue;
            std::size_t j = 0;
            Value v = detail::parse_value(pending, j, pending_line);
            table.insert(pending_key, std::move(v));
            pending_key.clear();
            pending.clear();
            continue;
        }
        if (i >= line.size()) continue;
        if (line[i] == '[') {
            std::size_t close = line.find(']', i);
            if (close == std::string::npos)
                throw ParseError("bad section header (line " + std::to_string(lineno) + ")");
            section = line.substr(i + 1, close - i - 1);
            continue;
        }
        std::size_t eq = line.find('=', i);
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value' (line " + std::to_string(lineno) + ")");
        std::string key = line.substr(i, eq - i);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        if (key.empty())
            throw ParseError("empty key (line " + std::to_string(lineno) + ")");
        std::string rhs = line.substr(eq + 1);
        int balance = 0;
        for (char c : rhs) balance += (c == '[') - (c == ']');
        std::string full = section.empty() ? key : section + "." + key;
        if (balance > 0) {
            pending_key = full;
            pending = rhs;
            pending_line = lineno;
            continue;
        }
        std::size_t j = 0;
        Value v = detail::parse_value(rhs, j, lineno);
        detail::skip_ws(rhs, j);
        if (j != rhs.size())
            throw ParseError("trailing characters after value (line " +
                             std::to_string(lineno) + ")");
        table.insert(full, std::move(v));
    }
    if (!pending_key.empty())
        throw ParseError("unterminated array for key '" + pending_key + "'");
    return table;
}

}  // namespace tomlite
