#include "difftrack/config.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "difftrack/io_util.hpp"

namespace difftrack {

namespace {

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, long line, const std::string& what) {
    std::ostringstream err;
    err << origin << ":" << line << ": " << what;
    throw std::runtime_error(err.str());
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
            return false;
        }
    }
    return true;
}

// Parses one value token starting at s[i]: a quoted string or a bare atom
// ending at a delimiter. Advances i past the token.
std::string parse_token(const std::string& s, std::size_t& i, const std::string& origin,
                        long line) {
    if (s[i] == '"') {
        std::string out;
        ++i;
        while (i < s.size() && s[i] != '"') {
            if (s[i] == '\\') {
                ++i;
                if (i >= s.size() || (s[i] != '"' && s[i] != '\\')) {
                    fail(origin, line, "bad escape in quoted string");
                }
            }
            out += s[i++];
        }
        if (i >= s.size()) fail(origin, line, "unterminated quoted string");
        ++i;
        return out;
    }
    std::size_t j = i;
    while (j < s.size() && s[j] != ',' && s[j] != ']') ++j;
    std::string out = trim(s.substr(i, j - i));
    if (out.empty()) fail(origin, line, "empty value");
    i = j;
    return out;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        if (line[0] == '[') {
            if (line.back() != ']') fail(origin, line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_key(section)) fail(origin, line_no, "invalid section name");
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) fail(origin, line_no, "invalid key '" + key + "'");
        if (!section.empty()) key = section + "." + key;
        if (cfg.values_.count(key)) fail(origin, line_no, "duplicate key '" + key + "'");

        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) fail(origin, line_no, "missing value for '" + key + "'");

        std::vector<std::string> toks;
        bool array = false;
        if (value[0] == '[') {
            array = true;
            std::size_t i = 1;
            for (;;) {
                while (i < value.size() && (value[i] == ' ' || value[i] == '\t')) ++i;
                if (i >= value.size()) fail(origin, line_no, "unterminated array");
                if (value[i] == ']') {
                    ++i;
                    break;
                }
                toks.push_back(parse_token(value, i, origin, line_no));
                while (i < value.size() && (value[i] == ' ' || value[i] == '\t')) ++i;
                if (i < value.size() && value[i] == ',') {
                    ++i;
                } else if (i < value.size() && value[i] == ']') {
                    ++i;
                    break;
                } else {
                    fail(origin, line_no, "expected ',' or ']' in array");
                }
            }
            if (trim(value.substr(i)).size()) fail(origin, line_no, "trailing text after array");
        } else if (value[0] == '"') {
            std::size_t i = 0;
            toks.push_back(parse_token(value, i, origin, line_no));
            if (trim(value.substr(i)).size()) fail(origin, line_no, "trailing text after string");
        } else {
            toks.push_back(value);
        }
        cfg.values_[key] = std::move(toks);
        cfg.is_array_[key] = array;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in = open_input(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        (void)value;
        if (key.rfind(prefix, 0) == 0) out.push_back(key);
    }
    return out;
}

std::string Config::describe(const std::string& key) const {
    return "config " + origin_ + ": key '" + key + "'";
}

const std::vector<std::string>& Config::tokens(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw std::runtime_error(describe(key) + " is missing");
    }
    return it->second;
}

std::string Config::get_string(const std::string& key) const {
    const auto& t = tokens(key);
    if (is_array_.at(key) || t.size() != 1) {
        throw std::runtime_error(describe(key) + " must be a single value");
    }
    return t[0];
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
    const std::string s = get_string(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw std::runtime_error(describe(key) + " is not a number: '" + s + "'");
    }
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key) const {
    const std::string s = get_string(key);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') {
        throw std::runtime_error(describe(key) + " is not an integer: '" + s + "'");
    }
    return v;
}

long Config::get_int(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
    const std::string s = get_string(key);
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::runtime_error(describe(key) + " must be true or false");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
    return tokens(key);
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& s : tokens(key)) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') {
            throw std::runtime_error(describe(key) + " has a non-numeric element: '" + s + "'");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<long> Config::get_int_list(const std::string& key) const {
    std::vector<long> out;
    for (const std::string& s : tokens(key)) {
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0') {
            throw std::runtime_error(describe(key) + " has a non-integer element: '" + s + "'");
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace difftrack
