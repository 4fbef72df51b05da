#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tactile/train/trainer.hpp"

namespace tactile::io {

inline constexpr int kModelFormatVersion = 1;
/// First eight bytes of every model file.
inline constexpr char kModelMagic[8] = {'T', 'A', 'C', 'T', 'M', 'D', 'L', '\n'};

/// Layout: magic, header length as u64 little-endian, JSON header
/// (format_version, architecture, normalization, metadata, tensors with
/// name/shape/group), then every tensor as little-endian f64 in header order.
std::string encode_model(const train::TrainedModel& model);
train::TrainedModel decode_model(const std::string& bytes);

void save_model(const std::filesystem::path& path, const train::TrainedModel& model, bool overwrite);
train::TrainedModel load_model(const std::filesystem::path& path);

nlohmann::json architecture_to_json(const model::ModelConfig& config);
nlohmann::json normalization_to_json(const NormalizationSpec& spec);

}  // namespace tactile::io
