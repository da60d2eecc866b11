#pragma once

#include "tieq/common.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tieq {

// Declarative run configuration: `key = value` lines grouped into [sections],
// '#' comments, one top-level `command` key. Unknown keys are rejected
// against a per-command schema at validation time.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    const std::string& command() const { return command_; }
    void set_command(const std::string& c) { command_ = c; }

    bool has(const std::string& section, const std::string& key) const;
    std::string get_str(const std::string& section, const std::string& key) const;
    std::string get_str_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_num(const std::string& section, const std::string& key) const;
    double get_num_or(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key) const;
    long get_int_or(const std::string& section, const std::string& key, long fallback) const;

    // throws ConfigError when a present key is not in the allowed set
    void check_known_keys(const std::string& section, const std::set<std::string>& allowed) const;
    void check_known_sections(const std::set<std::string>& allowed) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::string command_;
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// "a, b; c, d" -> row-major entries with row/column counts
struct MatrixText {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::string> entries;
};

MatrixText parse_matrix_text(const std::string& text);

}  // namespace tieq
