#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "tactile/core/error.hpp"
#include "tactile/train/normalization.hpp"
#include "tactile/train/optimizer.hpp"
#include "tactile/train/split.hpp"
#include "tactile/train/trainer.hpp"

using namespace tactile;
using namespace tactile::train;
using model::Matrix;

namespace {

model::ModelConfig tiny_config() {
    model::ModelConfig cfg;
    cfg.image_size = 16;
    cfg.channels = {4, 6};
    cfg.bottleneck_dim = 8;
    cfg.num_classes = 4;
    return cfg;
}

model::InputBatch random_input(int batch, int size, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    model::InputBatch in;
    in.batch = batch;
    in.channels = 6;
    in.height = size;
    in.width = size;
    in.data.resize(static_cast<std::size_t>(6 * batch * size * size));
    for (double& v : in.data) v = u(rng);
    return in;
}

// Small labeled dataset with 16x16 images.
sim::PathSpec small_spec() {
    sim::PathSpec spec;
    spec.grid_nx = 2;
    spec.grid_ny = 1;
    spec.depths_mm = {0.5, 1.0};
    spec.radii_mm = {0.6};
    spec.n_angles = 3;
    return spec;
}

sim::GenerateOptions small_render() {
    sim::GenerateOptions opts;
    opts.render.height = 16;
    opts.render.width = 16;
    return opts;
}

model::ModelConfig small_model(const sim::PathSpec& spec) {
    model::ModelConfig cfg = tiny_config();
    cfg.num_classes = spec.points_per_surface();
    return cfg;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::sqrt(na) + std::sqrt(nb);
    return scale < 1e-14 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

}  // namespace

TEST_CASE("lr_schedule follows the inverse decay") {
    CHECK(lr_schedule(0.1, 0) == 0.1);
    // (1 + 3)^-0.75 = 2^-1.5
    CHECK(lr_schedule(0.01, 10000) == doctest::Approx(0.01 * 0.35355339059327373).epsilon(1e-14));
    double prev = lr_schedule(0.1, 0);
    for (long i = 1; i < 5000; i += 37) {
        const double cur = lr_schedule(0.1, i);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK_THROWS_AS(lr_schedule(0.1, -1), InputError);
}

TEST_CASE("sgd_momentum_step accumulates velocity per group") {
    model::ModelParams p = model::ModelParams::zeros(tiny_config());
    for (auto& t : p.tensors()) std::fill(t.values.begin(), t.values.end(), 1.0);
    model::ModelParams g = p;
    model::ModelParams v = p.zeros_like();
    sgd_momentum_step(p, g, v, 0.1, {0.1, 1.0}, 0.9);
    CHECK(p.at("regressor.weight").values[0] == doctest::Approx(0.9));
    CHECK(p.at("encoder.conv0.weight").values[0] == doctest::Approx(0.99));
    sgd_momentum_step(p, g, v, 0.1, {0.1, 1.0}, 0.9);
    // Two steps move by lr * (1 + 1.9) = lr * 2.9.
    CHECK(p.at("regressor.weight").values[0] == doctest::Approx(1.0 - 0.29));
    CHECK(p.at("bottleneck.bias").values[3] == doctest::Approx(1.0 - 0.29));
    CHECK(p.at("encoder.conv1.bias").values[0] == doctest::Approx(1.0 - 0.029));
}

TEST_CASE("scale_forces maps the source range onto [0,1] and back") {
    NormalizationSpec spec{{-0.75, -0.75, -3.0}, {0.75, 0.75, 0.0}};
    Matrix f(2, 3);
    f << 0.0, 0.75, -1.5, -0.75, 0.3, -3.0;
    const Matrix n = scale_forces(f, spec, ScaleDirection::Normalize);
    CHECK(n(0, 2) == doctest::Approx(0.5));
    CHECK(n(0, 0) == doctest::Approx(0.5));
    CHECK(n(0, 1) == doctest::Approx(1.0));
    CHECK(n(1, 0) == doctest::Approx(0.0));
    CHECK(n(1, 2) == doctest::Approx(0.0));
    const Matrix back = scale_forces(n, spec, ScaleDirection::Denormalize);
    CHECK((back - f).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("split sizes use floor partitions with the remainder in train") {
    CHECK(split_sizes(10, {}) == std::array<std::size_t, 3>{6, 2, 2});
    CHECK(split_sizes(10830, {}) == std::array<std::size_t, 3>{6498, 2166, 2166});
    CHECK(split_sizes(7, {}) == std::array<std::size_t, 3>{5, 1, 1});
    CHECK(split_sizes(0, {}) == std::array<std::size_t, 3>{0, 0, 0});
    CHECK_THROWS_AS(SplitRatios({0.5, 0.2, 0.2}).validate(), InputError);
}

TEST_CASE("split_target is deterministic, disjoint and exhaustive") {
    const auto ds = sim::generate_dataset({true, 0, 0}, small_spec(), 3, small_render());
    const auto a = split_target(ds, {}, 11);
    const auto b = split_target(ds, {}, 11);
    const auto c = split_target(ds, {}, 12);
    std::multiset<std::string> ids;
    for (const auto* part : {&a.train, &a.valid, &a.test})
        for (const auto& s : part->samples) ids.insert(s.id);
    CHECK(ids.size() == ds.size());
    CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == ds.size());
    CHECK(a.valid.size() == ds.size() / 5);
    auto ids_of = [](const sim::Dataset& d) {
        std::vector<std::string> out;
        for (const auto& s : d.samples) out.push_back(s.id);
        return out;
    };
    CHECK(ids_of(a.test) == ids_of(b.test));
    CHECK(ids_of(a.test) != ids_of(c.test));
    for (const auto& s : a.test.samples) CHECK(s.split == sim::Split::Test);
}

TEST_CASE("full objective gradient matches central differences") {
    std::mt19937_64 rng(21);
    const model::ModelConfig cfg = tiny_config();
    const auto params = model::ModelParams::initialize(cfg, 4);
    SourceBatch sb;
    sb.input = random_input(4, 16, rng);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    sb.targets = Matrix(4, 3);
    for (Eigen::Index i = 0; i < sb.targets.size(); ++i) sb.targets.data()[i] = u(rng);
    sb.onehot = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) sb.onehot(i, i % 4) = 1.0;
    TargetBatch tb{random_input(4, 16, rng)};

    for (auto transfer : {model::TransferLoss::Lmmd, model::TransferLoss::Mmd, model::TransferLoss::Coral}) {
        CAPTURE(model::to_string(transfer));
        const Objective obj{{1.0, 1.0, 1.0}, transfer, {}};
        const GradientResult r = compute_gradients(params, sb, &tb, obj);
        CHECK(r.transfer > 0.0);
        const double h = 1e-6;
        for (const auto& t : r.grads.tensors()) {
            CAPTURE(t.name);
            std::vector<double> fd(t.values.size());
            for (std::size_t i = 0; i < t.values.size(); ++i) {
                auto plus = params;
                auto minus = params;
                plus.at(t.name).values[i] += h;
                minus.at(t.name).values[i] -= h;
                fd[i] = (compute_gradients(plus, sb, &tb, obj).total - compute_gradients(minus, sb, &tb, obj).total) /
                        (2 * h);
            }
            CHECK(relative_error(t.values, fd) < 1e-4);
        }
    }
}

TEST_CASE("gradients are linear in the loss weights") {
    std::mt19937_64 rng(5);
    const auto params = model::ModelParams::initialize(tiny_config(), 9);
    SourceBatch sb;
    sb.input = random_input(4, 16, rng);
    sb.targets = Matrix::Constant(4, 3, 0.3);
    sb.onehot = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) sb.onehot(i, (i * 3) % 4) = 1.0;
    TargetBatch tb{random_input(4, 16, rng)};
    const auto g1 = compute_gradients(params, sb, &tb, {{1, 1, 1}, model::TransferLoss::Lmmd, {}});
    const auto g2 = compute_gradients(params, sb, &tb, {{1, 1, 2}, model::TransferLoss::Lmmd, {}});
    const auto g0 = compute_gradients(params, sb, &tb, {{1, 1, 0}, model::TransferLoss::Lmmd, {}});
    CHECK(g2.total - g1.total == doctest::Approx(g1.transfer));
    for (std::size_t k = 0; k < g1.grads.tensors().size(); ++k) {
        const auto& a = g1.grads.tensors()[k].values;
        const auto& b = g2.grads.tensors()[k].values;
        const auto& c = g0.grads.tensors()[k].values;
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] - a[i] == doctest::Approx(a[i] - c[i]).epsilon(1e-6));
    }
    CHECK_THROWS_AS(compute_gradients(params, sb, nullptr, {{1, 1, 1}, model::TransferLoss::Lmmd, {}}), InputError);
}

TEST_CASE("regression gradient vanishes at the target") {
    std::mt19937_64 rng(8);
    const auto params = model::ModelParams::initialize(tiny_config(), 2);
    SourceBatch sb;
    sb.input = random_input(3, 16, rng);
    sb.targets = model::regress(params, model::encode(params, sb.input));
    sb.onehot = Matrix::Zero(3, 4);
    sb.onehot.col(0).setOnes();
    const auto g = compute_gradients(params, sb, nullptr, {});
    CHECK(g.regression == doctest::Approx(0.0));
    for (const auto& t : g.grads.tensors())
        for (double v : t.values) CHECK(v == 0.0);
}

TEST_CASE("pretraining is deterministic given the seed") {
    const auto spec = small_spec();
    const auto ds = sim::generate_dataset({true, 0, 0}, spec, 1, small_render());
    TrainConfig cfg = pretrain_defaults();
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.seed = 3;
    std::vector<EpochTrace> seen;
    const auto a = pretrain_source(ds, small_model(spec), cfg, [&](const EpochTrace& t) { seen.push_back(t); });
    const auto b = pretrain_source(ds, small_model(spec), cfg);
    CHECK(a.model.params == b.model.params);
    CHECK(seen.size() == 2);
    CHECK(a.trace.back().iteration == 2 * static_cast<long>((ds.size() + 3) / 4));
    CHECK(a.trace.back().classification == 0.0);
    cfg.seed = 4;
    CHECK_FALSE(pretrain_source(ds, small_model(spec), cfg).model.params == a.model.params);

    cfg.loss_weights = {0.0, 5.0, 5.0};  // ignored: pretraining is source-only
    cfg.seed = 3;
    CHECK(pretrain_source(ds, small_model(spec), cfg).model.params == a.model.params);
}

TEST_CASE("adaptation ignores target labels") {
    const auto spec = small_spec();
    const auto source = sim::generate_dataset({true, 0, 0}, spec, 1, small_render());
    auto target = sim::generate_dataset({false, 1, 1}, spec, 2, small_render());
    TrainConfig pre = pretrain_defaults();
    pre.epochs = 1;
    pre.batch_size = 4;
    const auto base = pretrain_source(source, small_model(spec), pre);

    TrainConfig cfg = adapt_defaults();
    cfg.epochs = 2;
    cfg.batch_size = 4;
    const auto clean = adapt(source, target, base.model, cfg);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (auto& s : target.samples) {
        s.force = ForceLabel{u(rng), u(rng), u(rng)};
        s.class_index = 0;
    }
    const auto corrupted = adapt(source, target, base.model, cfg);
    CHECK(clean.model.params == corrupted.model.params);
    CHECK(clean.trace.back().iteration == 2 * static_cast<long>((source.size() + 3) / 4));

    CHECK_THROWS_AS(adapt(source, target.subset({0}), base.model, cfg), InputError);
    CHECK_THROWS_AS(pretrain_source(strip_labels(source), small_model(spec), pre), InputError);
}

TEST_CASE("predictions are denormalized into the source range") {
    const auto spec = small_spec();
    const auto ds = sim::generate_dataset({true, 0, 0}, spec, 1, small_render());
    TrainedModel m;
    m.params = model::ModelParams::zeros(small_model(spec));
    m.normalization = normalization_from_labels(ds);
    const Matrix f = predict_forces(m, ds, 5);
    CHECK(f.rows() == static_cast<Eigen::Index>(ds.size()));
    for (int a = 0; a < 3; ++a)
        CHECK(f(0, a) == doctest::Approx(0.5 * (m.normalization.min[a] + m.normalization.max[a])));
    CHECK(extract_features(m.params, ds, 3).isZero(0.0));
}
