#include "tactile/io/config.hpp"

#include "tactile/core/atomic_file.hpp"
#include "tactile/core/error.hpp"
#include "tactile/io/json_reader.hpp"
#include "tactile/io/manifest.hpp"

namespace tactile::io {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& path, const std::string& message) {
    if (!ok) throw ConfigError(path, message);
}

model::LossWeights parse_weights(const json& doc, const std::string& where, model::LossWeights w) {
    ObjectReader r(doc, where);
    w.lambda_r = r.number_or("lambda_r", w.lambda_r);
    w.lambda_c = r.number_or("lambda_c", w.lambda_c);
    w.lambda_t = r.number_or("lambda_t", w.lambda_t);
    require(w.lambda_r >= 0, r.path_of("lambda_r"), "must be >= 0");
    require(w.lambda_c >= 0, r.path_of("lambda_c"), "must be >= 0");
    require(w.lambda_t >= 0, r.path_of("lambda_t"), "must be >= 0");
    r.finish();
    return w;
}

train::TrainConfig parse_stage(const json& doc, const std::string& where, train::TrainConfig c) {
    ObjectReader r(doc, where);
    c.eta0 = r.number_or("eta0", c.eta0);
    require(c.eta0 > 0, r.path_of("eta0"), "must be > 0");
    c.epochs = r.int_or("epochs", c.epochs);
    require(c.epochs >= 0, r.path_of("epochs"), "must be >= 0");
    c.batch_size = r.int_or("batch_size", c.batch_size);
    require(c.batch_size >= 2, r.path_of("batch_size"), "must be >= 2");
    c.momentum = r.number_or("momentum", c.momentum);
    require(c.momentum >= 0 && c.momentum < 1, r.path_of("momentum"), "must be in [0, 1)");
    if (const json* s = r.member("schedule")) {
        ObjectReader sr(*s, r.path_of("schedule"));
        c.schedule.a = sr.number_or("a", c.schedule.a);
        c.schedule.p = sr.number_or("p", c.schedule.p);
        require(c.schedule.a >= 0, sr.path_of("a"), "must be >= 0");
        require(c.schedule.p >= 0, sr.path_of("p"), "must be >= 0");
        sr.finish();
    }
    c.backbone_lr_factor = r.number_or("backbone_lr_factor", c.backbone_lr_factor);
    require(c.backbone_lr_factor > 0 && c.backbone_lr_factor <= 1, r.path_of("backbone_lr_factor"),
            "must be in (0, 1]");
    if (const json* w = r.member("loss_weights")) c.loss_weights = parse_weights(*w, r.path_of("loss_weights"), c.loss_weights);
    if (const auto t = r.string("transfer")) {
        try {
            c.transfer = model::transfer_loss_from_string(*t);
        } catch (const InputError&) {
            throw ConfigError(r.path_of("transfer"), "expected one of lmmd, mmd, coral");
        }
    }
    if (const json* k = r.member("kernel")) {
        ObjectReader kr(*k, r.path_of("kernel"));
        c.kernel.kernel_mul = kr.number_or("kernel_mul", c.kernel.kernel_mul);
        c.kernel.kernel_num = kr.int_or("kernel_num", c.kernel.kernel_num);
        require(c.kernel.kernel_mul > 1, kr.path_of("kernel_mul"), "must be > 1");
        require(c.kernel.kernel_num >= 1, kr.path_of("kernel_num"), "must be >= 1");
        kr.finish();
    }
    c.seed = r.u64_or("seed", c.seed);
    r.finish();
    return c;
}

DataConfig parse_data(const json& doc, const std::string& where) {
    ObjectReader r(doc, where);
    DataConfig d;
    if (const json* p = r.member("path_spec")) {
        if (p->is_string()) {
            const auto name = p->get<std::string>();
            if (name == "full")
                d.path_spec = sim::full_path();
            else if (name == "sparse")
                d.path_spec = sim::sparse_path();
            else
                throw ConfigError(r.path_of("path_spec"), "expected \"full\", \"sparse\" or an object");
        } else {
            d.path_spec = path_spec_from_json(*p, r.path_of("path_spec"));
        }
    }
    d.seed = r.u64_or("seed", d.seed);
    if (const json* s = r.member("split")) {
        ObjectReader sr(*s, r.path_of("split"));
        d.split.train = sr.number_or("train", d.split.train);
        d.split.valid = sr.number_or("valid", d.split.valid);
        d.split.test = sr.number_or("test", d.split.test);
        sr.finish();
        try {
            d.split.validate();
        } catch (const InputError& e) {
            throw ConfigError(sr.path(), e.what());
        }
    }
    d.split_seed = r.u64_or("split_seed", d.split_seed);
    r.finish();
    return d;
}

ModelSection parse_model(const json& doc, const std::string& where) {
    ObjectReader r(doc, where);
    ModelSection m;
    if (auto c = r.integers("channels")) {
        require(!c->empty(), r.path_of("channels"), "needs at least one layer");
        for (std::size_t i = 0; i < c->size(); ++i)
            require((*c)[i] >= 1, r.path_of("channels") + "[" + std::to_string(i) + "]", "must be >= 1");
        m.channels = *c;
    }
    m.bottleneck_dim = r.int_or("bottleneck_dim", m.bottleneck_dim);
    require(m.bottleneck_dim >= 1, r.path_of("bottleneck_dim"), "must be >= 1");
    r.finish();
    return m;
}

}  // namespace

RunConfig parse_config(const json& doc) {
    ObjectReader r(doc, "$");
    RunConfig c;
    if (const json* d = r.member("data")) c.data = parse_data(*d, "$.data");
    if (const json* m = r.member("model")) c.model = parse_model(*m, "$.model");
    if (const json* t = r.member("train")) c.train = parse_stage(*t, "$.train", c.train);
    if (const json* a = r.member("adapt")) c.adapt = parse_stage(*a, "$.adapt", c.adapt);
    r.finish();
    return c;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("$", path.string() + ": invalid JSON: " + e.what());
    }
    return parse_config(doc);
}

json to_json(const train::TrainConfig& c) {
    return json{{"eta0", c.eta0},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"momentum", c.momentum},
                {"schedule", {{"a", c.schedule.a}, {"p", c.schedule.p}}},
                {"backbone_lr_factor", c.backbone_lr_factor},
                {"loss_weights",
                 {{"lambda_r", c.loss_weights.lambda_r},
                  {"lambda_c", c.loss_weights.lambda_c},
                  {"lambda_t", c.loss_weights.lambda_t}}},
                {"transfer", model::to_string(c.transfer)},
                {"kernel", {{"kernel_mul", c.kernel.kernel_mul}, {"kernel_num", c.kernel.kernel_num}}},
                {"seed", c.seed}};
}

json to_json(const RunConfig& c) {
    return json{{"data",
                 {{"path_spec", path_spec_to_json(c.data.path_spec)},
                  {"seed", c.data.seed},
                  {"split", {{"train", c.data.split.train}, {"valid", c.data.split.valid}, {"test", c.data.split.test}}},
                  {"split_seed", c.data.split_seed}}},
                {"model", {{"channels", c.model.channels}, {"bottleneck_dim", c.model.bottleneck_dim}}},
                {"train", to_json(c.train)},
                {"adapt", to_json(c.adapt)}};
}

model::ModelConfig model_config(const ModelSection& section, int image_size, int num_classes) {
    model::ModelConfig m;
    m.input_channels = 6;
    m.image_size = image_size;
    m.channels = section.channels;
    m.bottleneck_dim = section.bottleneck_dim;
    m.num_classes = num_classes;
    m.validate();
    return m;
}

}  // namespace tactile::io
