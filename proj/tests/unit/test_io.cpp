#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "tactile/core/atomic_file.hpp"
#include "tactile/core/error.hpp"
#include "tactile/io/config.hpp"
#include "tactile/io/manifest.hpp"
#include "tactile/io/model_file.hpp"
#include "tactile/io/png.hpp"
#include "tactile/io/trace.hpp"

using namespace tactile;
using namespace tactile::io;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("tactile_io_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

// Copies the sidecar of a real dataset so hand-written manifests can be read.
void write_sidecar(const fs::path& dir) {
    const json sidecar{{"format_version", kManifestFormatVersion},
                       {"domain", {{"markers", true}, {"illumination_index", 0}, {"elastomer_index", 0}}},
                       {"path_spec", path_spec_to_json(sim::sparse_path())},
                       {"seed", 1}};
    write_text(dir / kSidecarName, sidecar.dump());
}

std::string record(const std::string& extra) {
    return R"({"format_version":1,"id":"s000000","contact_image_path":"images/a.png",)"
           R"("reference_image_path":"references/r.png","markers":true,"illumination_index":0,)"
           R"("elastomer_index":0,"seed":1)" +
           extra + "}\n";
}

std::string error_of(const auto& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

sim::Dataset sparse_dataset(bool labeled = true) {
    sim::GenerateOptions opts;
    opts.labeled = labeled;
    return sim::generate_dataset({true, 1, 2}, sim::sparse_path(), 11, opts);
}

}  // namespace

TEST_CASE("png round trip is within half a quantization step") {
    Image img(5, 7);
    auto d = img.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<float>(i % 97) / 96.0f;
    const Image back = decode_png(encode_png(img));
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(back.data()[i] - d[i]) <= 1.0f / 510.0f + 1e-7f);
}

TEST_CASE("empty manifest reads as an empty dataset") {
    TempDir dir("empty");
    write_sidecar(dir.path);
    write_text(dir.path / kManifestName, "");
    const sim::Dataset ds = read_manifest(dir.path);
    CHECK(ds.empty());
    CHECK(ds.spec == sim::sparse_path());
}

TEST_CASE("record validation names the line and record") {
    TempDir dir("invalid");
    write_sidecar(dir.path);

    write_text(dir.path / kManifestName, record(R"(,"fx":0.1,"fy":0.2,"class_index":3)"));
    std::string msg = error_of([&] { read_manifest(dir.path); });
    CHECK(msg.find(":1") != std::string::npos);
    CHECK(msg.find("s000000") != std::string::npos);
    CHECK(msg.find("$.fz") != std::string::npos);

    write_text(dir.path / kManifestName, record("") + "{not json\n");
    msg = error_of([&] { read_manifest(dir.path); });
    CHECK(msg.find(":2: malformed JSON") != std::string::npos);

    write_text(dir.path / kManifestName, record(R"(,"colour":"red")"));
    CHECK(error_of([&] { read_manifest(dir.path); }).find("$.colour: unknown key") != std::string::npos);

    write_text(dir.path / kManifestName, record(R"(,"fx":0,"fy":0,"fz":-1,"class_index":49)"));
    CHECK(error_of([&] { read_manifest(dir.path); }).find("$.class_index") != std::string::npos);

    write_text(dir.path / kManifestName, record(R"(,"split":"holdout")"));
    CHECK(error_of([&] { read_manifest(dir.path); }).find("$.split") != std::string::npos);
}

TEST_CASE("missing image file is reported on access") {
    TempDir dir("missing");
    write_sidecar(dir.path);
    write_text(dir.path / kManifestName, record(""));
    const sim::Dataset ds = read_manifest(dir.path);
    REQUIRE(ds.size() == 1);
    CHECK_THROWS_AS(ds.samples[0].contact.get(), IoError);
}

TEST_CASE("sparse dataset round trips through the manifest") {
    const sim::Dataset ds = sparse_dataset();
    REQUIRE(ds.size() == 441);
    TempDir dir("roundtrip");
    const fs::path manifest = write_manifest(ds, dir.path / "a");
    CHECK(manifest == dir.path / "a" / kManifestName);

    ReadStats stats;
    const sim::Dataset back = read_manifest(manifest, {LabelPolicy::Read, &stats});
    CHECK(stats.records == 441);
    CHECK(stats.label_reads == 441);
    REQUIRE(back.size() == ds.size());
    CHECK(back.domain == ds.domain);
    CHECK(back.spec == ds.spec);
    CHECK(back.seed == ds.seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& a = ds.samples[i];
        const auto& b = back.samples[i];
        CHECK(a.id == b.id);
        REQUIRE(b.force);
        // Bit-for-bit label equality.
        CHECK(std::memcmp(&*a.force, &*b.force, sizeof(ForceLabel)) == 0);
        CHECK(a.class_index == b.class_index);
        CHECK(a.domain == b.domain);
        CHECK(a.seed == b.seed);
        if (i % 40 == 0) {
            const auto pa = a.contact.get().data();
            const auto pb = b.contact.get().data();
            for (std::size_t k = 0; k < pa.size(); ++k)
                worst = std::max(worst, std::abs(static_cast<double>(std::clamp(pa[k], 0.0f, 1.0f)) - pb[k]));
        }
    }
    CHECK(worst <= 1.0 / 510.0 + 1e-7);

    // Surface points share one reference file.
    CHECK(back.samples[0].reference.shares_with(back.samples[48].reference));
    CHECK_FALSE(back.samples[0].reference.shares_with(back.samples[49].reference));
    std::size_t refs = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path / "a" / "references")) ++refs;
    CHECK(refs == 9);

    // Rewriting what was read gives the same manifest bytes.
    write_manifest(back, dir.path / "b");
    CHECK(read_file(dir.path / "a" / kManifestName) == read_file(dir.path / "b" / kManifestName));
    CHECK(read_file(dir.path / "a" / kSidecarName) == read_file(dir.path / "b" / kSidecarName));
}

TEST_CASE("manifests are not overwritten without permission") {
    sim::Dataset ds = sparse_dataset();
    ds = ds.subset({0, 1, 2});
    TempDir dir("force");
    write_manifest(ds, dir.path);
    CHECK(error_of([&] { write_manifest(ds, dir.path); }).find("--force") != std::string::npos);
    CHECK_NOTHROW(write_manifest(ds, dir.path, {true}));
}

TEST_CASE("unlabeled records and the ignore policy") {
    TempDir dir("labels");
    const sim::Dataset unlabeled = sparse_dataset(false).subset({0, 1, 2, 3});
    write_manifest(unlabeled, dir.path / "u");
    const std::string text = read_file(dir.path / "u" / kManifestName);
    CHECK(text.find("\"fx\"") == std::string::npos);
    CHECK(text.find("class_index") == std::string::npos);
    ReadStats stats;
    const sim::Dataset u = read_manifest(dir.path / "u", {LabelPolicy::Read, &stats});
    CHECK_FALSE(u.samples[0].labeled());
    CHECK(stats.records_with_labels == 0);

    // Garbage label values are never parsed under the ignore policy.
    write_sidecar(dir.path);
    write_text(dir.path / kManifestName, record(R"(,"fx":"bad","fz":[1],"class_index":-4)"));
    stats = {};
    const sim::Dataset ign = read_manifest(dir.path, {LabelPolicy::Ignore, &stats});
    CHECK(stats.records == 1);
    CHECK(stats.records_with_labels == 1);
    CHECK(stats.label_reads == 0);
    CHECK_FALSE(ign.samples[0].labeled());
    CHECK_THROWS_AS(read_manifest(dir.path), IoError);

    // Explicit nulls count as absent.
    write_text(dir.path / kManifestName, record(R"(,"fx":null,"fy":null,"fz":null,"split":"test")"));
    const sim::Dataset nul = read_manifest(dir.path);
    CHECK_FALSE(nul.samples[0].labeled());
    CHECK(nul.samples[0].split == sim::Split::Test);
}

TEST_CASE("manifest paths may not escape the dataset directory") {
    TempDir dir("escape");
    write_sidecar(dir.path);
    std::string rec = record("");
    rec.replace(rec.find("images/a.png"), 12, "../x.png");
    write_text(dir.path / kManifestName, rec);
    CHECK(error_of([&] { read_manifest(dir.path); }).find("$.contact_image_path") != std::string::npos);
}

TEST_CASE("model file round trip is bit exact") {
    model::ModelConfig cfg;
    cfg.image_size = 16;
    cfg.channels = {2, 3};
    cfg.bottleneck_dim = 5;
    cfg.num_classes = 4;
    train::TrainedModel m;
    m.params = model::ModelParams::initialize(cfg, 3);
    m.params.tensors()[1].values[0] = -0.0;
    m.params.tensors()[1].values[1] = 5e-324;
    m.normalization = {{-0.7, -0.6, -3.0}, {0.7, 0.6, 0.0}};
    m.metadata = {{"stage", "pretrain"}, {"seed", 3}};

    const std::string bytes = encode_model(m);
    CHECK(bytes.compare(0, 8, std::string(kModelMagic, 8)) == 0);
    const train::TrainedModel back = decode_model(bytes);
    CHECK(back.params.config() == cfg);
    CHECK(back.normalization == m.normalization);
    CHECK(back.metadata == m.metadata);
    for (std::size_t t = 0; t < m.params.tensors().size(); ++t) {
        const auto& a = m.params.tensors()[t].values;
        const auto& b = back.params.tensors()[t].values;
        REQUIRE(a.size() == b.size());
        CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    }
    CHECK(encode_model(back) == bytes);

    // Payload layout: header length then little-endian doubles.
    std::uint64_t hlen = 0;
    for (int i = 0; i < 8; ++i) hlen |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
    CHECK(bytes.size() == 16 + hlen + 8 * m.params.parameter_count());
    const json header = json::parse(bytes.substr(16, hlen));
    CHECK(header["format_version"] == kModelFormatVersion);
    CHECK(header["tensors"][0]["name"] == "encoder.conv0.weight");
    CHECK(header["tensors"][0]["group"] == "backbone");

    CHECK_THROWS_AS(decode_model(bytes.substr(0, bytes.size() - 8)), IoError);
    CHECK_THROWS_AS(decode_model("NOTAMODEL......."), IoError);
    std::string bad_version = bytes;
    const auto pos = bad_version.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    bad_version[pos + 17] = '7';
    CHECK(error_of([&] { decode_model(bad_version); }).find("format version 7") != std::string::npos);
}

TEST_CASE("empty config resolves to the protocol defaults") {
    const RunConfig c = parse_config(json::object());
    CHECK(c.train.batch_size == 32);
    CHECK(c.train.momentum == 0.9);
    CHECK(c.train.schedule.a == 0.0003);
    CHECK(c.train.schedule.p == 0.75);
    CHECK(c.train.eta0 == 0.1);
    CHECK(c.train.epochs == 20);
    CHECK(c.train.loss_weights == model::LossWeights{1.0, 0.0, 0.0});
    CHECK(c.adapt.eta0 == 0.01);
    CHECK(c.adapt.epochs == 10);
    CHECK(c.adapt.loss_weights == model::LossWeights{1.0, 1.0, 1.0});
    CHECK(c.adapt.backbone_lr_factor == 0.1);
    CHECK(c.data.split == train::SplitRatios{0.6, 0.2, 0.2});
    CHECK(c.data.path_spec.total_points() == 10830);

    // The echoed form parses back to the same config.
    CHECK(parse_config(to_json(c)) == c);
    const json echoed = to_json(c);
    CHECK(echoed["adapt"]["loss_weights"]["lambda_t"] == 1.0);
    CHECK(echoed["train"]["schedule"]["p"] == 0.75);
}

TEST_CASE("config overrides keep the other defaults") {
    const RunConfig c = parse_config(json::parse(
        R"({"adapt":{"epochs":3,"transfer":"coral"},"data":{"path_spec":"sparse"},"model":{"channels":[8,8]}})"));
    CHECK(c.adapt.epochs == 3);
    CHECK(c.adapt.eta0 == 0.01);
    CHECK(c.adapt.transfer == model::TransferLoss::Coral);
    CHECK(c.data.path_spec == sim::sparse_path());
    CHECK(c.model.channels == std::vector<int>{8, 8});
    CHECK(c.model.bottleneck_dim == 256);
    CHECK(c.train == train::pretrain_defaults());
}

TEST_CASE("config errors carry a JSON path") {
    auto path_of = [](const char* text) {
        try {
            parse_config(json::parse(text));
        } catch (const ConfigError& e) {
            return e.path();
        }
        return std::string("<none>");
    };
    CHECK(path_of(R"({"adapt":{"loss_weights":{"lambda_t":-1}}})") == "$.adapt.loss_weights.lambda_t");
    CHECK(path_of(R"({"adapt":{"loss_weights":{"lambda_x":1}}})") == "$.adapt.loss_weights.lambda_x");
    CHECK(path_of(R"({"train":{"batch_size":"32"}})") == "$.train.batch_size");
    CHECK(path_of(R"({"train":{"batch_size":1}})") == "$.train.batch_size");
    CHECK(path_of(R"({"train":{"momentum":1.0}})") == "$.train.momentum");
    CHECK(path_of(R"({"train":{"eta0":0}})") == "$.train.eta0");
    CHECK(path_of(R"({"optimizer":{}})") == "$.optimizer");
    CHECK(path_of(R"({"model":{"channels":[4,0]}})") == "$.model.channels[1]");
    CHECK(path_of(R"({"data":{"path_spec":{"grid_nx":0}}})") == "$.data.path_spec");
    CHECK(path_of(R"({"data":{"split":{"test":0.5}}})") == "$.data.split");
    CHECK(path_of(R"({"adapt":{"transfer":"dann"}})") == "$.adapt.transfer");
    CHECK(path_of("[]") == "$");
}

TEST_CASE("trace lines carry the loss terms") {
    const std::string text = trace_to_jsonl({{1, 10, 0.5, 0.25, 0.125, 0.01}, {2, 20, 0.4, 0.2, 0.1, 0.009}});
    const auto nl = text.find('\n');
    REQUIRE(nl != std::string::npos);
    const json first = json::parse(text.substr(0, nl));
    CHECK(first == json{{"epoch", 1}, {"iteration", 10}, {"L_r", 0.5}, {"L_c", 0.25}, {"L_t", 0.125}, {"eta", 0.01}});
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
