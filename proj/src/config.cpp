#include "qkflow/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qkf::config {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

KvConfig KvConfig::parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

KvConfig KvConfig::parse_string(const std::string& text)
{
    KvConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name at line " + std::to_string(lineno));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
        if (section.empty()) throw ConfigError("key outside any section at line " +
                                               std::to_string(lineno));
        cfg.kv_[section + "." + key] = value;
    }
    return cfg;
}

std::string KvConfig::serialize() const
{
    std::string out;
    std::string current;
    for (const auto& [key, value] : kv_) { // std::map iterates sorted
        const auto dot = key.find('.');
        const std::string section = key.substr(0, dot);
        if (section != current) {
            if (!out.empty()) out += '\n';
            out += '[' + section + "]\n";
            current = section;
        }
        out += key.substr(dot + 1) + " = " + value + '\n';
    }
    return out;
}

std::string KvConfig::get_string(const std::string& key) const
{
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required config key: " + key);
    return it->second;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const
{
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key) const
{
    const std::string s = get_string(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError("config key " + key + " is not a number: '" + s + "'");
    return v;
}

double KvConfig::get_double(const std::string& key, double fallback) const
{
    return has(key) ? get_double(key) : fallback;
}

long long KvConfig::get_int(const std::string& key) const
{
    const std::string s = get_string(key);
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError("config key " + key + " is not an integer: '" + s + "'");
    return v;
}

long long KvConfig::get_int(const std::string& key, long long fallback) const
{
    return has(key) ? get_int(key) : fallback;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const
{
    if (!has(key)) return fallback;
    const std::string s = get_string(key);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError("config key " + key + " is not a boolean: '" + s + "'");
}

std::vector<double> KvConfig::get_list(const std::string& key) const
{
    const std::string s = get_string(key);
    std::vector<double> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str())
            throw ConfigError("config key " + key + " has a non-numeric item: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("config key " + key + " is an empty list");
    return out;
}

} // namespace qkf::config
