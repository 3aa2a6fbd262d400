#pragma once

// Minimal key-value configuration dialect:
//   # full-line comments
//   top_key = 3.5
//   [section]
//   name = "quoted string"      (\" and \\ escapes)
//   grid = [0.2, 0.4, 0.8]
// Section headers prefix the keys that follow ("section.name"). Values are
// kept as token lists; scalar accessors reject arrays, list accessors accept
// a scalar as a one-element list. Duplicate keys are errors.

#include <map>
#include <string>
#include <vector>

namespace difftrack {

class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;

    std::vector<std::string> get_string_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<long> get_int_list(const std::string& key) const;

private:
    const std::vector<std::string>& tokens(const std::string& key) const;
    std::string describe(const std::string& key) const;

    std::map<std::string, std::vector<std::string>> values_;
    std::map<std::string, bool> is_array_;
    std::string origin_;
};

}  // namespace difftrack
