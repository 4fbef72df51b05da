#pragma once

#include <cstddef>
#include <filesystem>

#include "json.hpp"
#include "tactile/sim/dataset.hpp"

namespace tactile::io {

inline constexpr int kManifestFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kSidecarName = "dataset.json";

struct WriteOptions {
    bool overwrite = false;
};

/// Writes `dir/manifest.jsonl` (one record per sample, sorted by id),
/// `dir/dataset.json` (domain, path spec, seed, render options) and PNG
/// images under `dir/images` and `dir/references`. Shared reference images
/// are written once. Returns the manifest path.
std::filesystem::path write_manifest(const sim::Dataset& dataset, const std::filesystem::path& dir,
                                     const WriteOptions& options = {});

enum class LabelPolicy {
    Read,    // parse and validate force and class fields
    Ignore,  // never look at label values; samples come back unlabeled
};

/// Counters filled by read_manifest.
struct ReadStats {
    std::size_t records = 0;
    std::size_t label_reads = 0;          // records whose label values were parsed
    std::size_t records_with_labels = 0;  // records that carry label keys
};

struct ReadOptions {
    LabelPolicy labels = LabelPolicy::Read;
    ReadStats* stats = nullptr;
};

/// Reads a manifest file, or `dir/manifest.jsonl` when given a directory.
/// Images load lazily. Errors name the line number or record id.
sim::Dataset read_manifest(const std::filesystem::path& path, const ReadOptions& options = {});

nlohmann::json path_spec_to_json(const sim::PathSpec& spec);
/// Throws ConfigError with a JSON path rooted at `where`.
sim::PathSpec path_spec_from_json(const nlohmann::json& doc, const std::string& where = "$");

}  // namespace tactile::io
