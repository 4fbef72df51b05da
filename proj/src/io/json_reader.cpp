#include "tactile/io/json_reader.hpp"

#include <cmath>
#include <limits>

#include "tactile/core/error.hpp"

namespace tactile::io {

using nlohmann::json;

ObjectReader::ObjectReader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_, "expected an object");
}

const json* ObjectReader::find(const std::string& key) {
    used_.insert(key);
    const auto it = doc_.find(key);
    if (it == doc_.end() || it->is_null()) return nullptr;
    return &*it;
}

const json* ObjectReader::member(const std::string& key) { return find(key); }

std::optional<double> ObjectReader::number(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ConfigError(path_of(key), "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ConfigError(path_of(key), "must be finite");
    return d;
}

std::optional<long long> ObjectReader::integer(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) throw ConfigError(path_of(key), "expected an integer");
    if (v->is_number_unsigned() && v->get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<long long>::max()))
        throw ConfigError(path_of(key), "integer out of range");
    return v->get<long long>();
}

std::optional<bool> ObjectReader::boolean(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) throw ConfigError(path_of(key), "expected true or false");
    return v->get<bool>();
}

std::optional<std::string> ObjectReader::string(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(path_of(key), "expected a string");
    return v->get<std::string>();
}

std::optional<std::vector<double>> ObjectReader::numbers(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(path_of(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number())
            throw ConfigError(path_of(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
    }
    return out;
}

std::optional<std::vector<int>> ObjectReader::integers(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(path_of(key), "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        if (!e.is_number_integer() || e.get<long long>() < std::numeric_limits<int>::min() ||
            e.get<long long>() > std::numeric_limits<int>::max())
            throw ConfigError(path_of(key) + "[" + std::to_string(i) + "]", "expected an integer");
        out.push_back(e.get<int>());
    }
    return out;
}

int ObjectReader::int_or(const std::string& key, int fallback) {
    const auto v = integer(key);
    if (!v) return fallback;
    if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max())
        throw ConfigError(path_of(key), "integer out of range");
    return static_cast<int>(*v);
}

std::uint64_t ObjectReader::u64_or(const std::string& key, std::uint64_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<long long>() < 0))
        throw ConfigError(path_of(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
}

void ObjectReader::finish() const {
    for (const auto& [key, value] : doc_.items())
        if (!used_.contains(key)) throw ConfigError(path_of(key), "unknown key");
}

}  // namespace tactile::io
