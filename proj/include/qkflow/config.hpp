#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qkflow/core.hpp"

namespace qkf::config {

/// Flat key-value configuration: INI-like sections, keys stored as
/// "section.key". '#' starts a comment; values keep internal spaces.
class KvConfig {
public:
    static KvConfig parse_file(const std::string& path);
    static KvConfig parse_string(const std::string& text);

    /// Canonical text form: sections and keys sorted, "key = value" lines.
    /// parse(serialize(x)) reproduces x exactly.
    std::string serialize() const;

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    const std::map<std::string, std::string>& entries() const { return kv_; }

    friend bool operator==(const KvConfig&, const KvConfig&) = default;

private:
    std::map<std::string, std::string> kv_;
};

} // namespace qkf::config
