#include "tactile/io/model_file.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "tactile/core/atomic_file.hpp"
#include "tactile/core/error.hpp"
#include "tactile/io/json_reader.hpp"

namespace tactile::io {

using nlohmann::json;

namespace {

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

const char* group_name(model::ParamGroup g) { return g == model::ParamGroup::Backbone ? "backbone" : "head"; }

model::ModelConfig architecture_from_json(const json& doc) {
    ObjectReader r(doc, "$.architecture");
    model::ModelConfig c;
    c.input_channels = r.int_or("input_channels", -1);
    c.image_size = r.int_or("image_size", -1);
    const auto channels = r.integers("channels");
    if (!channels) throw ConfigError("$.architecture.channels", "missing");
    c.channels = *channels;
    c.bottleneck_dim = r.int_or("bottleneck_dim", -1);
    c.num_classes = r.int_or("num_classes", -1);
    r.finish();
    try {
        c.validate();
    } catch (const InputError& e) {
        throw ConfigError("$.architecture", e.what());
    }
    return c;
}

NormalizationSpec normalization_from_json(const json& doc) {
    ObjectReader r(doc, "$.normalization");
    NormalizationSpec n;
    const auto lo = r.numbers("min");
    const auto hi = r.numbers("max");
    if (!lo || lo->size() != 3) throw ConfigError("$.normalization.min", "expected three numbers");
    if (!hi || hi->size() != 3) throw ConfigError("$.normalization.max", "expected three numbers");
    for (int a = 0; a < 3; ++a) {
        n.min[a] = (*lo)[a];
        n.max[a] = (*hi)[a];
    }
    r.finish();
    try {
        n.validate();
    } catch (const InputError& e) {
        throw ConfigError("$.normalization", e.what());
    }
    return n;
}

}  // namespace

json architecture_to_json(const model::ModelConfig& c) {
    return json{{"input_channels", c.input_channels},
                {"image_size", c.image_size},
                {"channels", c.channels},
                {"bottleneck_dim", c.bottleneck_dim},
                {"num_classes", c.num_classes}};
}

json normalization_to_json(const NormalizationSpec& n) {
    return json{{"min", n.min}, {"max", n.max}};
}

std::string encode_model(const train::TrainedModel& m) {
    json tensors = json::array();
    std::size_t count = 0;
    for (const auto& t : m.params.tensors()) {
        tensors.push_back(json{{"name", t.name}, {"shape", t.shape}, {"group", group_name(t.group)}});
        count += t.size();
    }
    const json header{{"format_version", kModelFormatVersion},
                      {"architecture", architecture_to_json(m.params.config())},
                      {"normalization", normalization_to_json(m.normalization)},
                      {"metadata", m.metadata},
                      {"tensors", tensors}};
    const std::string text = header.dump();

    std::string out(kModelMagic, sizeof kModelMagic);
    put_u64(out, text.size());
    out += text;
    out.reserve(out.size() + count * 8);
    for (const auto& t : m.params.tensors())
        for (const double v : t.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

train::TrainedModel decode_model(const std::string& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kModelMagic, sizeof kModelMagic) != 0)
        throw IoError("not a model file (bad magic)");
    const std::uint64_t header_len = get_u64(bytes, 8);
    if (header_len > bytes.size() - 16) throw IoError("model file truncated in header");
    json header;
    try {
        header = json::parse(bytes.substr(16, header_len));
    } catch (const json::parse_error& e) {
        throw IoError(std::string("model header is not valid JSON: ") + e.what());
    }

    train::TrainedModel m;
    try {
        ObjectReader r(header, "$");
        const long long version = r.integer("format_version").value_or(-1);
        if (version != kModelFormatVersion)
            throw ConfigError("$.format_version", "unsupported model format version " + std::to_string(version));
        const json* arch = r.member("architecture");
        if (!arch) throw ConfigError("$.architecture", "missing");
        m.params = model::ModelParams::zeros(architecture_from_json(*arch));
        const json* norm = r.member("normalization");
        if (!norm) throw ConfigError("$.normalization", "missing");
        m.normalization = normalization_from_json(*norm);
        if (const json* meta = r.member("metadata")) {
            if (!meta->is_object()) throw ConfigError("$.metadata", "expected an object");
            m.metadata = *meta;
        }
        const json* tensors = r.member("tensors");
        if (!tensors || !tensors->is_array()) throw ConfigError("$.tensors", "expected an array");
        auto& expected = m.params.tensors();
        if (tensors->size() != expected.size())
            throw ConfigError("$.tensors", "expected " + std::to_string(expected.size()) + " tensors for this architecture");
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const std::string where = "$.tensors[" + std::to_string(i) + "]";
            ObjectReader tr((*tensors)[i], where);
            const auto name = tr.string("name");
            const auto shape = tr.integers("shape");
            const auto group = tr.string("group");
            tr.finish();
            if (!name || *name != expected[i].name)
                throw ConfigError(where + ".name", "expected " + expected[i].name);
            if (!shape || *shape != expected[i].shape) throw ConfigError(where + ".shape", "does not match the architecture");
            if (!group || *group != group_name(expected[i].group))
                throw ConfigError(where + ".group", std::string("expected ") + group_name(expected[i].group));
        }
        r.finish();
    } catch (const ConfigError& e) {
        throw IoError(std::string("invalid model header: ") + e.what());
    }

    std::size_t at = 16 + header_len;
    const std::size_t needed = m.params.parameter_count() * 8;
    if (bytes.size() - at != needed)
        throw IoError("model payload has " + std::to_string(bytes.size() - at) + " bytes, expected " +
                      std::to_string(needed));
    for (auto& t : m.params.tensors())
        for (double& v : t.values) {
            v = std::bit_cast<double>(get_u64(bytes, at));
            at += 8;
        }
    return m;
}

void save_model(const std::filesystem::path& path, const train::TrainedModel& model, bool overwrite) {
    write_file_atomic(path, encode_model(model), overwrite);
}

train::TrainedModel load_model(const std::filesystem::path& path) {
    try {
        return decode_model(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace tactile::io
