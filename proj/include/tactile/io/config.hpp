#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "tactile/model/network.hpp"
#include "tactile/sim/path.hpp"
#include "tactile/train/split.hpp"
#include "tactile/train/trainer.hpp"

namespace tactile::io {

struct DataConfig {
    sim::PathSpec path_spec = sim::full_path();
    std::uint64_t seed = 0;
    train::SplitRatios split{};
    std::uint64_t split_seed = 0;

    friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

/// Encoder shape. Input channels and class count come from the data.
struct ModelSection {
    std::vector<int> channels{16, 32, 64};
    int bottleneck_dim = 256;

    friend bool operator==(const ModelSection&, const ModelSection&) = default;
};

/// Sections `data`, `model`, `train` (source-only stage) and `adapt`.
struct RunConfig {
    DataConfig data{};
    ModelSection model{};
    train::TrainConfig train = train::pretrain_defaults();
    train::TrainConfig adapt = train::adapt_defaults();

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Missing keys take defaults; unknown keys, type mismatches and
/// out-of-range values throw ConfigError with a JSON path.
/// `data.path_spec` may also be the string "full" or "sparse".
RunConfig parse_config(const nlohmann::json& doc);
/// Reads a JSON file; a parse failure is reported as a ConfigError at `$`.
RunConfig parse_config_file(const std::filesystem::path& path);

/// Fully resolved form with every default written out.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const train::TrainConfig& config);

model::ModelConfig model_config(const ModelSection& section, int image_size, int num_classes);

}  // namespace tactile::io
