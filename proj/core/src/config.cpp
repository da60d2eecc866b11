#include "tieq/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tieq {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
            cfg.sections_[section];  // sections may be empty
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty() && key == "command") {
            cfg.command_ = value;
            continue;
        }
        if (section.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": only 'command' may appear before the first section");
        auto [it, inserted] = cfg.sections_[section].emplace(key, value);
        if (!inserted)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                              "' in [" + section + "]");
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get_str(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end())
        throw ConfigError("missing section [" + section + "]");
    auto k = s->second.find(key);
    if (k == s->second.end())
        throw ConfigError("missing key '" + key + "' in [" + section + "]");
    return k->second;
}

std::string Config::get_str_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get_str(section, key) : fallback;
}

double Config::get_num(const std::string& section, const std::string& key) const {
    const std::string v = get_str(section, key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "' in [" + section + "] is not a number: '" + v + "'");
    return x;
}

double Config::get_num_or(const std::string& section, const std::string& key,
                          double fallback) const {
    return has(section, key) ? get_num(section, key) : fallback;
}

long Config::get_int(const std::string& section, const std::string& key) const {
    const double x = get_num(section, key);
    const long n = static_cast<long>(x);
    if (static_cast<double>(n) != x)
        throw ConfigError("key '" + key + "' in [" + section + "] is not an integer");
    return n;
}

long Config::get_int_or(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

void Config::check_known_keys(const std::string& section,
                              const std::set<std::string>& allowed) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [key, value] : s->second)
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in [" + section + "]");
}

void Config::check_known_sections(const std::set<std::string>& allowed) const {
    for (const auto& [name, keys] : sections_)
        if (!allowed.count(name)) throw ConfigError("unknown section [" + name + "]");
}

MatrixText parse_matrix_text(const std::string& text) {
    MatrixText out;
    std::vector<std::vector<std::string>> rows;
    std::string row_text;
    std::istringstream rows_in(text);
    while (std::getline(rows_in, row_text, ';')) {
        std::vector<std::string> row;
        std::istringstream cols_in(row_text);
        std::string cell;
        while (std::getline(cols_in, cell, ',')) {
            cell = trim(cell);
            if (!cell.empty()) row.push_back(cell);
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("empty matrix text");
    out.rows = rows.size();
    out.cols = rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != out.cols) throw ConfigError("ragged matrix text: '" + text + "'");
        for (const auto& cell : row) out.entries.push_back(cell);
    }
    return out;
}

}  // namespace tieq
