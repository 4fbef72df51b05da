#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tactile/core/types.hpp"
#include "tactile/model/losses.hpp"
#include "tactile/model/network.hpp"
#include "tactile/sim/dataset.hpp"
#include "tactile/train/optimizer.hpp"

namespace tactile::train {

/// Hyper-parameters of one training stage.
struct TrainConfig {
    double eta0 = 0.1;
    int epochs = 20;
    int batch_size = 32;
    double momentum = 0.9;
    Schedule schedule{};
    double backbone_lr_factor = 0.1;
    model::LossWeights loss_weights{1.0, 0.0, 0.0};
    model::TransferLoss transfer = model::TransferLoss::Lmmd;
    model::KernelParams kernel{};
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const TrainConfig& a, const TrainConfig& b) {
        return a.eta0 == b.eta0 && a.epochs == b.epochs && a.batch_size == b.batch_size &&
               a.momentum == b.momentum && a.schedule == b.schedule &&
               a.backbone_lr_factor == b.backbone_lr_factor && a.loss_weights == b.loss_weights &&
               a.transfer == b.transfer && a.kernel.kernel_mul == b.kernel.kernel_mul &&
               a.kernel.kernel_num == b.kernel.kernel_num && a.seed == b.seed;
    }
};

/// Source-only stage: eta0 0.1, 20 epochs, lambda (1,0,0).
TrainConfig pretrain_defaults();
/// Adaptation stage: eta0 0.01, 10 epochs, lambda (1,1,1).
TrainConfig adapt_defaults();

/// Parameters plus the source normalization used to train them.
struct TrainedModel {
    model::ModelParams params;
    NormalizationSpec normalization;
    nlohmann::json metadata = nlohmann::json::object();
};

struct SourceBatch {
    model::InputBatch input;
    model::Matrix targets;  // B x 3, normalized
    model::Matrix onehot;   // B x n
};

struct TargetBatch {
    model::InputBatch input;
};

SourceBatch make_source_batch(const sim::Dataset& source, std::span<const std::size_t> indices,
                              const NormalizationSpec& normalization, int num_classes);
/// Touches only the images of the selected samples.
TargetBatch make_target_batch(const sim::Dataset& target, std::span<const std::size_t> indices);

struct Objective {
    model::LossWeights weights{1.0, 0.0, 0.0};
    model::TransferLoss transfer = model::TransferLoss::Lmmd;
    model::KernelParams kernel{};
};

struct GradientResult {
    model::ModelParams grads;
    double regression = 0.0;
    double classification = 0.0;
    double transfer = 0.0;
    double total = 0.0;
};

/// Encoder buffers reused across iterations to avoid reallocating.
struct GradientWorkspace {
    model::EncoderCache source;
    model::EncoderCache target;
};

/// Reverse-mode gradient of lambda_r L_r + lambda_c L_c + lambda_t L_t.
/// The target batch (images only) is required iff lambda_t > 0; target
/// pseudo labels come from the classifier and are differentiated through.
GradientResult compute_gradients(const model::ModelParams& params, const SourceBatch& source,
                                 const TargetBatch* target, const Objective& objective,
                                 GradientWorkspace* workspace = nullptr);

/// Per-epoch means of the loss terms; `eta` is the rate of the last step.
struct EpochTrace {
    int epoch = 0;
    long iteration = 0;
    double regression = 0.0;
    double classification = 0.0;
    double transfer = 0.0;
    double eta = 0.0;
};

struct TrainResult {
    TrainedModel model;
    std::vector<EpochTrace> trace;
};

using EpochCallback = std::function<void(const EpochTrace&)>;

/// Source-only training from a seeded initialization. The loss weights are
/// forced to (1, 0, 0) whatever the config says.
TrainResult pretrain_source(const sim::Dataset& source, const model::ModelConfig& architecture,
                            const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Unsupervised adaptation. Each iteration draws one labeled source batch
/// and one target batch of images; an epoch spans the longer stream, the
/// shorter one cycles. Target labels are dropped before training starts.
TrainResult adapt(const sim::Dataset& source, const sim::Dataset& target_train,
                  const TrainedModel& pretrained, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Copy of `dataset` without force or class labels.
sim::Dataset strip_labels(const sim::Dataset& dataset);

/// Regressor outputs in [0,1] for every sample, in dataset order.
model::Matrix predict_normalized(const model::ModelParams& params, const sim::Dataset& dataset,
                                 int batch_size = 64);
/// Denormalized force predictions in newtons.
model::Matrix predict_forces(const TrainedModel& model, const sim::Dataset& dataset, int batch_size = 64);
/// Bottleneck features for every sample, in dataset order.
model::Matrix extract_features(const model::ModelParams& params, const sim::Dataset& dataset,
                               int batch_size = 64);

}  // namespace tactile::train
