#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace tactile::io {

/// Typed access to one JSON object that reports errors as ConfigError with
/// a JSON path, and rejects keys that were never asked for in finish().
class ObjectReader {
public:
    ObjectReader(const nlohmann::json& doc, std::string path);

    const std::string& path() const { return path_; }
    std::string path_of(const std::string& key) const { return path_ + "." + key; }
    bool has(const std::string& key) const { return doc_.contains(key); }

    std::optional<double> number(const std::string& key);
    std::optional<long long> integer(const std::string& key);
    std::optional<bool> boolean(const std::string& key);
    std::optional<std::string> string(const std::string& key);
    std::optional<std::vector<double>> numbers(const std::string& key);
    std::optional<std::vector<int>> integers(const std::string& key);
    /// Raw member, marked as used; nullptr when absent.
    const nlohmann::json* member(const std::string& key);

    double number_or(const std::string& key, double fallback) { return number(key).value_or(fallback); }
    int int_or(const std::string& key, int fallback);
    std::uint64_t u64_or(const std::string& key, std::uint64_t fallback);
    bool bool_or(const std::string& key, bool fallback) { return boolean(key).value_or(fallback); }

    /// Throws for the first key that was not consumed.
    void finish() const;

private:
    const nlohmann::json* find(const std::string& key);

    const nlohmann::json& doc_;
    std::string path_;
    std::set<std::string> used_;
};

}  // namespace tactile::io
