#include "tactile/train/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/core/error.hpp"
#include "tactile/train/normalization.hpp"
#include "tactile/train/split.hpp"

namespace tactile::train {

namespace {

using model::Matrix;

/// Endless sequence of sample indices: a fresh seeded permutation per pass.
class BatchStream {
public:
    BatchStream(std::size_t n, std::uint64_t seed, std::uint64_t stream)
        : n_(n), seed_(seed), stream_(stream) { reshuffle(); }

    std::vector<std::size_t> next(std::size_t count) {
        std::vector<std::size_t> out;
        out.reserve(count);
        while (out.size() < count) {
            if (pos_ == order_.size()) reshuffle();
            out.push_back(order_[pos_++]);
        }
        return out;
    }

private:
    void reshuffle() {
        order_ = seeded_permutation(n_, seed_, stream_ * 1000003ULL + pass_++);
        pos_ = 0;
    }

    std::size_t n_;
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t pass_ = 0;
    std::size_t pos_ = 0;
    std::vector<std::size_t> order_;
};

model::InputBatch pack(const sim::Dataset& ds, std::span<const std::size_t> indices) {
    std::vector<const Image*> contact;
    std::vector<const Image*> reference;
    contact.reserve(indices.size());
    reference.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= ds.size()) throw InputError("batch index out of range");
        contact.push_back(&ds.samples[i].contact.get());
        reference.push_back(&ds.samples[i].reference.get());
    }
    return model::pack_inputs(contact, reference);
}

GroupFactors factors_for(const TrainConfig& config) { return {config.backbone_lr_factor, 1.0}; }

void accumulate(EpochTrace& t, const GradientResult& r) {
    t.regression += r.regression;
    t.classification += r.classification;
    t.transfer += r.transfer;
}

void finish(EpochTrace& t, long iterations) {
    const double n = static_cast<double>(std::max(1L, iterations));
    t.regression /= n;
    t.classification /= n;
    t.transfer /= n;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(eta0 > 0)) throw InputError("eta0 must be > 0");
    if (epochs < 0) throw InputError("epochs must be >= 0");
    if (batch_size < 2) throw InputError("batch_size must be >= 2");
    if (!(momentum >= 0 && momentum < 1)) throw InputError("momentum must be in [0,1)");
    if (!(backbone_lr_factor > 0 && backbone_lr_factor <= 1))
        throw InputError("backbone_lr_factor must be in (0,1]");
    if (!(schedule.a >= 0) || !(schedule.p >= 0)) throw InputError("schedule constants must be >= 0");
    loss_weights.validate();
}

TrainConfig pretrain_defaults() {
    TrainConfig c;
    c.eta0 = 0.1;
    c.epochs = 20;
    c.loss_weights = {1.0, 0.0, 0.0};
    return c;
}

TrainConfig adapt_defaults() {
    TrainConfig c;
    c.eta0 = 0.01;
    c.epochs = 10;
    c.loss_weights = {1.0, 1.0, 1.0};
    return c;
}

SourceBatch make_source_batch(const sim::Dataset& source, std::span<const std::size_t> indices,
                              const NormalizationSpec& normalization, int num_classes) {
    SourceBatch b;
    b.input = pack(source, indices);
    Matrix forces(static_cast<Eigen::Index>(indices.size()), 3);
    b.onehot = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), num_classes);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto& s = source.samples[indices[k]];
        if (!s.force || !s.class_index) throw InputError("source sample " + s.id + " is unlabeled");
        if (*s.class_index < 0 || *s.class_index >= num_classes)
            throw InputError("source sample " + s.id + " has a class index outside the model's range");
        const auto k_row = static_cast<Eigen::Index>(k);
        forces(k_row, 0) = s.force->fx;
        forces(k_row, 1) = s.force->fy;
        forces(k_row, 2) = s.force->fz;
        b.onehot(k_row, *s.class_index) = 1.0;
    }
    b.targets = scale_forces(forces, normalization, ScaleDirection::Normalize);
    return b;
}

TargetBatch make_target_batch(const sim::Dataset& target, std::span<const std::size_t> indices) {
    return TargetBatch{pack(target, indices)};
}

GradientResult compute_gradients(const model::ModelParams& params, const SourceBatch& source,
                                 const TargetBatch* target, const Objective& objective,
                                 GradientWorkspace* workspace) {
    objective.weights.validate();
    const auto& w = objective.weights;
    const bool need_target = w.lambda_t > 0.0;
    const bool need_classifier = w.lambda_c > 0.0 || (need_target && objective.transfer == model::TransferLoss::Lmmd);
    if (need_target && !target) throw InputError("transfer loss requires a target batch");
    if (need_target && target->input.batch < 2) throw InputError("target batch size must be >= 2");

    GradientResult r;
    r.grads = params.zeros_like();

    GradientWorkspace local;
    GradientWorkspace& ws = workspace ? *workspace : local;
    model::EncoderCache& source_cache = ws.source;
    const Matrix fs = model::encode(params, source.input, &source_cache);
    Matrix d_fs = Matrix::Zero(fs.rows(), fs.cols());

    const Matrix reg = model::regress(params, fs);
    Matrix d_reg;
    r.regression = model::regression_loss(reg, source.targets, &d_reg);
    if (w.lambda_r > 0.0) d_fs += model::regress_backward(params, fs, reg, w.lambda_r * d_reg, r.grads);

    Matrix probs_s;
    Matrix d_probs_s;
    if (need_classifier) {
        probs_s = model::classify(params, fs);
        Matrix d_ce;
        r.classification = model::classification_loss(probs_s, source.onehot, &d_ce);
        d_probs_s = w.lambda_c * d_ce;
    }

    if (need_target) {
        model::EncoderCache& target_cache = ws.target;
        const Matrix ft = model::encode(params, target->input, &target_cache);
        model::TransferGrad tg;
        Matrix probs_t;
        switch (objective.transfer) {
            case model::TransferLoss::Lmmd:
                probs_t = model::classify(params, ft);
                r.transfer = model::lmmd(fs, source.onehot, ft, probs_t, objective.kernel, &tg);
                break;
            case model::TransferLoss::Mmd:
                r.transfer = model::mmd_global(fs, ft, objective.kernel, &tg);
                break;
            case model::TransferLoss::Coral:
                r.transfer = model::coral_distance(fs, ft, &tg);
                break;
        }
        d_fs += w.lambda_t * tg.d_source;
        Matrix d_ft = w.lambda_t * tg.d_target;
        if (objective.transfer == model::TransferLoss::Lmmd)
            d_ft += model::classify_backward(params, ft, probs_t, w.lambda_t * tg.d_probs, r.grads);
        model::encode_backward(params, target_cache, d_ft, r.grads);
    }

    if (need_classifier && w.lambda_c > 0.0)
        d_fs += model::classify_backward(params, fs, probs_s, d_probs_s, r.grads);

    model::encode_backward(params, source_cache, d_fs, r.grads);
    r.total = model::total_loss(r.regression, r.classification, r.transfer, w);
    return r;
}

sim::Dataset strip_labels(const sim::Dataset& dataset) {
    sim::Dataset out = dataset;
    for (auto& s : out.samples) {
        s.force.reset();
        s.class_index.reset();
    }
    return out;
}

TrainResult pretrain_source(const sim::Dataset& source, const model::ModelConfig& architecture,
                            const TrainConfig& config_in, const EpochCallback& on_epoch) {
    TrainConfig config = config_in;
    config.loss_weights = {1.0, 0.0, 0.0};
    config.validate();
    if (source.empty()) throw InputError("source dataset is empty");
    if (!source.labeled()) throw InputError("pretraining requires a labeled source dataset");
    if (architecture.num_classes != source.num_classes())
        throw InputError("model num_classes does not match the source path spec");

    TrainResult result;
    result.model.normalization = normalization_from_labels(source);
    result.model.params = model::ModelParams::initialize(architecture, config.seed);
    result.model.metadata["stage"] = "pretrain";
    result.model.metadata["source_domain"] = source.domain.label();
    result.model.metadata["seed"] = config.seed;
    model::ModelParams velocity = result.model.params.zeros_like();

    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), source.size());
    const long per_epoch = static_cast<long>((source.size() + batch - 1) / batch);
    BatchStream stream(source.size(), config.seed, 1);
    const Objective objective{config.loss_weights, config.transfer, config.kernel};

    GradientWorkspace workspace;
    long iteration = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochTrace trace{epoch, 0, 0, 0, 0, 0};
        for (long it = 0; it < per_epoch; ++it, ++iteration) {
            const auto idx = stream.next(batch);
            const SourceBatch sb = make_source_batch(source, idx, result.model.normalization, architecture.num_classes);
            const GradientResult g = compute_gradients(result.model.params, sb, nullptr, objective, &workspace);
            trace.eta = lr_schedule(config.eta0, iteration, config.schedule);
            sgd_momentum_step(result.model.params, g.grads, velocity, trace.eta, factors_for(config), config.momentum);
            accumulate(trace, g);
        }
        trace.iteration = iteration;
        finish(trace, per_epoch);
        result.trace.push_back(trace);
        if (on_epoch) on_epoch(trace);
    }
    return result;
}

TrainResult adapt(const sim::Dataset& source, const sim::Dataset& target_train,
                  const TrainedModel& pretrained, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (source.empty()) throw InputError("source dataset is empty");
    if (!source.labeled()) throw InputError("adaptation requires a labeled source dataset");
    if (target_train.size() < 2) throw InputError("target batch size must be >= 2");
    const int classes = pretrained.params.config().num_classes;
    if (classes != source.num_classes())
        throw InputError("model num_classes does not match the source path spec");

    const sim::Dataset target = strip_labels(target_train);

    TrainResult result;
    result.model = pretrained;
    result.model.metadata["stage"] = "adapt";
    result.model.metadata["source_domain"] = source.domain.label();
    result.model.metadata["target_domain"] = target.domain.label();
    result.model.metadata["transfer"] = model::to_string(config.transfer);
    result.model.metadata["seed"] = config.seed;
    model::ModelParams velocity = result.model.params.zeros_like();

    const auto bsz = static_cast<std::size_t>(config.batch_size);
    const std::size_t source_batch = std::min(bsz, source.size());
    const std::size_t target_batch = std::min(bsz, target.size());
    const std::size_t longest = std::max(source.size(), target.size());
    const long per_epoch = static_cast<long>((longest + bsz - 1) / bsz);
    BatchStream source_stream(source.size(), config.seed, 2);
    BatchStream target_stream(target.size(), config.seed, 3);
    const Objective objective{config.loss_weights, config.transfer, config.kernel};

    GradientWorkspace workspace;
    long iteration = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochTrace trace{epoch, 0, 0, 0, 0, 0};
        for (long it = 0; it < per_epoch; ++it, ++iteration) {
            const auto s_idx = source_stream.next(source_batch);
            const auto t_idx = target_stream.next(target_batch);
            const SourceBatch sb = make_source_batch(source, s_idx, result.model.normalization, classes);
            const TargetBatch tb = make_target_batch(target, t_idx);
            const GradientResult g = compute_gradients(result.model.params, sb, &tb, objective, &workspace);
            trace.eta = lr_schedule(config.eta0, iteration, config.schedule);
            sgd_momentum_step(result.model.params, g.grads, velocity, trace.eta, factors_for(config), config.momentum);
            accumulate(trace, g);
        }
        trace.iteration = iteration;
        finish(trace, per_epoch);
        result.trace.push_back(trace);
        if (on_epoch) on_epoch(trace);
    }
    return result;
}

namespace {

template <typename F>
void for_each_chunk(const sim::Dataset& ds, int batch_size, F&& f) {
    if (batch_size < 1) throw InputError("batch size must be >= 1");
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < ds.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(ds.size(), start + static_cast<std::size_t>(batch_size));
        idx.clear();
        for (std::size_t i = start; i < end; ++i) idx.push_back(i);
        f(start, pack(ds, idx));
    }
}

}  // namespace

Matrix extract_features(const model::ModelParams& params, const sim::Dataset& dataset, int batch_size) {
    Matrix out(static_cast<Eigen::Index>(dataset.size()), params.config().bottleneck_dim);
    for_each_chunk(dataset, batch_size, [&](std::size_t start, const model::InputBatch& in) {
        out.middleRows(static_cast<Eigen::Index>(start), in.batch) = model::encode(params, in);
    });
    return out;
}

Matrix predict_normalized(const model::ModelParams& params, const sim::Dataset& dataset, int batch_size) {
    Matrix out(static_cast<Eigen::Index>(dataset.size()), 3);
    for_each_chunk(dataset, batch_size, [&](std::size_t start, const model::InputBatch& in) {
        out.middleRows(static_cast<Eigen::Index>(start), in.batch) =
            model::regress(params, model::encode(params, in));
    });
    return out;
}

Matrix predict_forces(const TrainedModel& model, const sim::Dataset& dataset, int batch_size) {
    return scale_forces(predict_normalized(model.params, dataset, batch_size), model.normalization,
                        ScaleDirection::Denormalize);
}

}  // namespace tactile::train
