#pragma once

#include <stdexcept>
#include <string>

namespace tactile {

/// Precondition violated by a caller-supplied value.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File-system or codec failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration rejected during parsing; `path()` is a JSON path such as
/// `$.adapt.loss_weights.lambda_t`.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string json_path, const std::string& message)
        : std::runtime_error(json_path + ": " + message), path_(std::move(json_path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace tactile
