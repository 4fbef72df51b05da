#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tactile/core/image.hpp"

namespace tactile::model {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Encoder: `channels.size()` 3x3 / stride-2 / pad-1 conv layers with ReLU,
/// global average pool, linear bottleneck to `bottleneck_dim`.
/// Heads: linear D->num_classes (softmax) and linear D->3 (sigmoid).
struct ModelConfig {
    int input_channels = 6;
    int image_size = 64;
    std::vector<int> channels{16, 32, 64};
    int bottleneck_dim = 256;
    int num_classes = 361;

    void validate() const;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Optimizer parameter group. Conv layers form the backbone; the bottleneck
/// and both heads train at the full learning rate.
enum class ParamGroup { Backbone, Head };

struct Tensor {
    std::string name;
    std::vector<int> shape;
    ParamGroup group = ParamGroup::Head;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Named parameter tensors. Shapes are fully determined by the config:
///   encoder.conv{k}.weight [Cout, Cin, 3, 3], encoder.conv{k}.bias [Cout]
///   bottleneck.weight [D, C_last], bottleneck.bias [D]
///   classifier.weight [n, D], classifier.bias [n]
///   regressor.weight [3, D], regressor.bias [3]
class ModelParams {
public:
    ModelParams() = default;

    /// All-zero tensors.
    static ModelParams zeros(const ModelConfig& config);
    /// He-uniform conv weights, uniform(+-1/sqrt(fan_in)) linear weights,
    /// zero biases; deterministic in `seed`.
    static ModelParams initialize(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    std::vector<Tensor>& tensors() { return tensors_; }
    const std::vector<Tensor>& tensors() const { return tensors_; }

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;

    std::size_t parameter_count() const;
    /// Zero tensors with identical names and shapes.
    ModelParams zeros_like() const;
    void set_zero();

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    ModelConfig config_;
    std::vector<Tensor> tensors_;
};

/// Batch of input pairs in channel-major layout [C][B][H][W]; channels are
/// contact RGB followed by reference RGB, each value (v - kInputOffset) * kInputScale.
struct InputBatch {
    int batch = 0;
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;
};

// Pixel intensities are mapped to (v - 0.5) * 10. Rendered images have a
// standard deviation near 0.1, so this puts the encoder input at roughly
// unit scale.
inline constexpr double kInputOffset = 0.5;
inline constexpr double kInputScale = 10.0;

/// Concatenates each contact image with its reference along the channel
/// axis. Throws InputError on shape mismatch.
InputBatch pack_inputs(std::span<const Image* const> contact, std::span<const Image* const> reference);

/// Intermediate activations kept for the backward pass. Reusing one cache
/// across batches of the same size avoids reallocating its buffers.
struct EncoderCache {
    std::vector<RowMatrix> columns;      // im2col per conv layer
    std::vector<RowMatrix> activations;  // post-ReLU outputs, [C][B*H*W]
    std::vector<int> out_sizes;          // spatial size per layer
    Matrix pooled;                       // B x C_last
    int batch = 0;
    mutable std::vector<RowMatrix> grad_scratch;  // backward workspace
    mutable RowMatrix cols_scratch;
};

/// Bottleneck features, B x D.
Matrix encode(const ModelParams& params, const InputBatch& input, EncoderCache* cache = nullptr);

/// Pre-softmax logits, B x n.
Matrix classifier_logits(const ModelParams& params, const Matrix& features);
/// Row-wise softmax of the classifier logits.
Matrix classify(const ModelParams& params, const Matrix& features);
Matrix softmax_rows(const Matrix& logits);
/// Sigmoid of the regressor outputs, B x 3 in (0,1).
Matrix regress(const ModelParams& params, const Matrix& features);

/// Accumulates parameter gradients of the encoder given dL/dfeatures.
void encode_backward(const ModelParams& params, const EncoderCache& cache, const Matrix& d_features,
                     ModelParams& grads);
/// Accumulates classifier gradients given dL/dprobs; returns dL/dfeatures.
Matrix classify_backward(const ModelParams& params, const Matrix& features, const Matrix& probs,
                         const Matrix& d_probs, ModelParams& grads);
/// Accumulates regressor gradients given dL/doutputs; returns dL/dfeatures.
Matrix regress_backward(const ModelParams& params, const Matrix& features, const Matrix& outputs,
                        const Matrix& d_outputs, ModelParams& grads);

}  // namespace tactile::model
