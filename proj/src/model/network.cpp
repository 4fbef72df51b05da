#include "tactile/model/network.hpp"

#include <cmath>
#include <random>

#include "tactile/core/error.hpp"
#include "tactile/core/rng.hpp"

namespace tactile::model {

namespace {

constexpr int kKernel = 3;
constexpr int kStride = 2;
constexpr int kPad = 1;

int conv_out(int size) { return (size + 2 * kPad - kKernel) / kStride + 1; }

std::string conv_name(std::size_t layer, const char* what) {
    return "encoder.conv" + std::to_string(layer) + "." + what;
}

using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

// [C][B][H][W] -> (C*9) x (B*Ho*Wo)
void im2col(const double* src, int channels, int batch, int height, int width, RowMatrix& cols) {
    const int ho = conv_out(height);
    const int wo = conv_out(width);
    cols.resize(static_cast<Eigen::Index>(channels) * kKernel * kKernel,
                static_cast<Eigen::Index>(batch) * ho * wo);
    for (int c = 0; c < channels; ++c) {
        for (int kr = 0; kr < kKernel; ++kr) {
            for (int kc = 0; kc < kKernel; ++kc) {
                double* row = cols.row((c * kKernel + kr) * kKernel + kc).data();
                for (int b = 0; b < batch; ++b) {
                    const double* plane = src + (static_cast<std::size_t>(c) * batch + b) * height * width;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * kStride + kr - kPad;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * kStride + kc - kPad;
                            *row++ = (iy >= 0 && iy < height && ix >= 0 && ix < width)
                                         ? plane[iy * width + ix]
                                         : 0.0;
                        }
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatters column gradients back onto the input grid.
void col2im(const RowMatrix& cols, int channels, int batch, int height, int width, double* dst) {
    const int ho = conv_out(height);
    const int wo = conv_out(width);
    std::fill(dst, dst + static_cast<std::size_t>(channels) * batch * height * width, 0.0);
    for (int c = 0; c < channels; ++c) {
        for (int kr = 0; kr < kKernel; ++kr) {
            for (int kc = 0; kc < kKernel; ++kc) {
                const double* row = cols.row((c * kKernel + kr) * kKernel + kc).data();
                for (int b = 0; b < batch; ++b) {
                    double* plane = dst + (static_cast<std::size_t>(c) * batch + b) * height * width;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * kStride + kr - kPad;
                        for (int ox = 0; ox < wo; ++ox, ++row) {
                            const int ix = ox * kStride + kc - kPad;
                            if (iy >= 0 && iy < height && ix >= 0 && ix < width)
                                plane[iy * width + ix] += *row;
                        }
                    }
                }
            }
        }
    }
}

Matrix linear(const Tensor& weight, const Tensor& bias, const Matrix& x) {
    const auto out = static_cast<Eigen::Index>(weight.shape[0]);
    const auto in = static_cast<Eigen::Index>(weight.shape[1]);
    ConstRowMap w(weight.values.data(), out, in);
    Eigen::Map<const Eigen::RowVectorXd> b(bias.values.data(), out);
    // Row by row so that each output row is bit-identical whatever the
    // batch size (Eigen picks kernels by shape).
    Matrix y(x.rows(), out);
    for (Eigen::Index i = 0; i < x.rows(); ++i) y.row(i).noalias() = x.row(i) * w.transpose() + b;
    return y;
}

// dY: B x out. Accumulates weight/bias grads; returns dX.
Matrix linear_backward(const Tensor& weight, const Matrix& x, const Matrix& dy, Tensor& d_weight,
                       Tensor& d_bias) {
    const auto out = static_cast<Eigen::Index>(weight.shape[0]);
    const auto in = static_cast<Eigen::Index>(weight.shape[1]);
    RowMap dw(d_weight.values.data(), out, in);
    Eigen::Map<Eigen::RowVectorXd> db(d_bias.values.data(), out);
    dw.noalias() += dy.transpose() * x;
    db += dy.colwise().sum();
    ConstRowMap w(weight.values.data(), out, in);
    return dy * w;
}

}  // namespace

void ModelConfig::validate() const {
    if (input_channels < 1) throw InputError("model input_channels must be >= 1");
    if (image_size < 1) throw InputError("model image_size must be >= 1");
    if (channels.empty()) throw InputError("encoder needs at least one conv layer");
    for (int c : channels)
        if (c < 1) throw InputError("encoder channel counts must be >= 1");
    if (bottleneck_dim < 1) throw InputError("bottleneck_dim must be >= 1");
    if (num_classes < 1) throw InputError("num_classes must be >= 1");
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
    config.validate();
    ModelParams p;
    p.config_ = config;
    auto add = [&](std::string name, std::vector<int> shape, ParamGroup group) {
        std::size_t n = 1;
        for (int s : shape) n *= static_cast<std::size_t>(s);
        p.tensors_.push_back(Tensor{std::move(name), std::move(shape), group, std::vector<double>(n, 0.0)});
    };
    int in = config.input_channels;
    for (std::size_t k = 0; k < config.channels.size(); ++k) {
        const int out = config.channels[k];
        add(conv_name(k, "weight"), {out, in, kKernel, kKernel}, ParamGroup::Backbone);
        add(conv_name(k, "bias"), {out}, ParamGroup::Backbone);
        in = out;
    }
    const int d = config.bottleneck_dim;
    add("bottleneck.weight", {d, in}, ParamGroup::Head);
    add("bottleneck.bias", {d}, ParamGroup::Head);
    add("classifier.weight", {config.num_classes, d}, ParamGroup::Head);
    add("classifier.bias", {config.num_classes}, ParamGroup::Head);
    add("regressor.weight", {3, d}, ParamGroup::Head);
    add("regressor.bias", {3}, ParamGroup::Head);
    return p;
}

ModelParams ModelParams::initialize(const ModelConfig& config, std::uint64_t seed) {
    ModelParams p = zeros(config);
    std::uint64_t stream = 0;
    for (Tensor& t : p.tensors_) {
        ++stream;
        if (t.shape.size() < 2) continue;  // biases stay zero
        std::size_t fan_in = 1;
        for (std::size_t k = 1; k < t.shape.size(); ++k) fan_in *= static_cast<std::size_t>(t.shape[k]);
        const bool conv = t.shape.size() == 4;
        const double bound = conv ? std::sqrt(6.0 / static_cast<double>(fan_in))
                                  : 1.0 / std::sqrt(static_cast<double>(fan_in));
        auto rng = make_stream(seed, stream);
        std::uniform_real_distribution<double> u(-bound, bound);
        for (double& v : t.values) v = u(rng);
    }
    return p;
}

Tensor& ModelParams::at(const std::string& name) {
    for (auto& t : tensors_)
        if (t.name == name) return t;
    throw InputError("no parameter tensor named '" + name + "'");
}

const Tensor& ModelParams::at(const std::string& name) const {
    for (const auto& t : tensors_)
        if (t.name == name) return t;
    throw InputError("no parameter tensor named '" + name + "'");
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
}

ModelParams ModelParams::zeros_like() const {
    ModelParams p = *this;
    p.set_zero();
    return p;
}

void ModelParams::set_zero() {
    for (auto& t : tensors_) std::fill(t.values.begin(), t.values.end(), 0.0);
}

InputBatch pack_inputs(std::span<const Image* const> contact, std::span<const Image* const> reference) {
    if (contact.size() != reference.size())
        throw InputError("contact and reference batches differ in size");
    if (contact.empty()) throw InputError("empty input batch");
    InputBatch in;
    in.batch = static_cast<int>(contact.size());
    in.channels = 2 * Image::kChannels;
    in.height = contact[0]->height();
    in.width = contact[0]->width();
    const std::size_t plane = static_cast<std::size_t>(in.height) * in.width;
    in.data.resize(static_cast<std::size_t>(in.channels) * in.batch * plane);
    for (int b = 0; b < in.batch; ++b) {
        const Image* pair[2] = {contact[b], reference[b]};
        for (int k = 0; k < 2; ++k) {
            if (pair[k]->height() != in.height || pair[k]->width() != in.width)
                throw InputError("input images differ in shape");
            const auto px = pair[k]->data();
            for (int ch = 0; ch < Image::kChannels; ++ch) {
                double* dst = in.data.data() + (static_cast<std::size_t>(k * 3 + ch) * in.batch + b) * plane;
                for (std::size_t i = 0; i < plane; ++i) dst[i] = (static_cast<double>(px[i * 3 + ch]) - kInputOffset) * kInputScale;
            }
        }
    }
    return in;
}

Matrix encode(const ModelParams& params, const InputBatch& input, EncoderCache* cache) {
    const ModelConfig& cfg = params.config();
    if (input.channels != cfg.input_channels)
        throw InputError("input has " + std::to_string(input.channels) + " channels, model expects " +
                         std::to_string(cfg.input_channels));
    if (input.height != cfg.image_size || input.width != cfg.image_size)
        throw InputError("input images are " + std::to_string(input.height) + "x" +
                         std::to_string(input.width) + ", model expects " + std::to_string(cfg.image_size));
    if (input.data.size() !=
        static_cast<std::size_t>(input.channels) * input.batch * input.height * input.width)
        throw InputError("input buffer size does not match its shape");

    EncoderCache local;
    EncoderCache& c = cache ? *cache : local;
    c.batch = input.batch;
    c.columns.resize(cfg.channels.size());
    c.activations.resize(cfg.channels.size());
    c.out_sizes.resize(cfg.channels.size());

    const double* src = input.data.data();
    int channels = input.channels;
    int size = input.height;
    for (std::size_t k = 0; k < cfg.channels.size(); ++k) {
        RowMatrix& cols = c.columns[k];
        RowMatrix& act = c.activations[k];
        im2col(src, channels, input.batch, size, size, cols);
        const Tensor& w = params.at(conv_name(k, "weight"));
        const Tensor& b = params.at(conv_name(k, "bias"));
        const int out = cfg.channels[k];
        ConstRowMap wm(w.values.data(), out, static_cast<Eigen::Index>(channels) * kKernel * kKernel);
        act.resize(out, cols.cols());
        // Per sample, for the same reason as in linear().
        const Eigen::Index step = cols.cols() / input.batch;
        for (int s = 0; s < input.batch; ++s)
            act.middleCols(s * step, step).noalias() = wm * cols.middleCols(s * step, step);
        for (int o = 0; o < out; ++o) {
            const double bias = b.values[o];
            for (double& v : act.row(o)) v = std::max(v + bias, 0.0);
        }
        size = conv_out(size);
        channels = out;
        c.out_sizes[k] = size;
        src = act.data();
    }

    const int area = size * size;
    const RowMatrix& last = c.activations.back();
    c.pooled.resize(input.batch, channels);
    for (int ch = 0; ch < channels; ++ch)
        for (int b = 0; b < input.batch; ++b)
            c.pooled(b, ch) = last.row(ch).segment(static_cast<Eigen::Index>(b) * area, area).sum() / area;

    return linear(params.at("bottleneck.weight"), params.at("bottleneck.bias"), c.pooled);
}

Matrix classifier_logits(const ModelParams& params, const Matrix& features) {
    return linear(params.at("classifier.weight"), params.at("classifier.bias"), features);
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double peak = logits.row(i).maxCoeff();
        p.row(i) = (logits.row(i).array() - peak).exp().matrix();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

Matrix classify(const ModelParams& params, const Matrix& features) {
    return softmax_rows(classifier_logits(params, features));
}

Matrix regress(const ModelParams& params, const Matrix& features) {
    Matrix z = linear(params.at("regressor.weight"), params.at("regressor.bias"), features);
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

void encode_backward(const ModelParams& params, const EncoderCache& cache, const Matrix& d_features,
                     ModelParams& grads) {
    const ModelConfig& cfg = params.config();
    const int batch = cache.batch;
    Matrix d_pooled = linear_backward(params.at("bottleneck.weight"), cache.pooled, d_features,
                                      grads.at("bottleneck.weight"), grads.at("bottleneck.bias"));

    const std::size_t layers = cfg.channels.size();
    const int last_size = cache.out_sizes.back();
    const int area = last_size * last_size;
    cache.grad_scratch.resize(layers);
    RowMatrix& top = cache.grad_scratch[layers - 1];
    top.resize(cfg.channels.back(), static_cast<Eigen::Index>(batch) * area);
    for (int ch = 0; ch < cfg.channels.back(); ++ch)
        for (int b = 0; b < batch; ++b)
            top.row(ch).segment(static_cast<Eigen::Index>(b) * area, area).setConstant(d_pooled(b, ch) / area);

    for (std::size_t k = layers; k-- > 0;) {
        RowMatrix& d_act = cache.grad_scratch[k];
        const RowMatrix& act = cache.activations[k];
        d_act.array() *= (act.array() > 0.0).cast<double>();

        Tensor& dw = grads.at(conv_name(k, "weight"));
        Tensor& db = grads.at(conv_name(k, "bias"));
        const int out = cfg.channels[k];
        const int in = k == 0 ? cfg.input_channels : cfg.channels[k - 1];
        const Eigen::Index fan = static_cast<Eigen::Index>(in) * kKernel * kKernel;
        RowMap dwm(dw.values.data(), out, fan);
        dwm.noalias() += d_act * cache.columns[k].transpose();
        for (int o = 0; o < out; ++o) db.values[o] += d_act.row(o).sum();

        if (k == 0) break;
        const Tensor& w = params.at(conv_name(k, "weight"));
        ConstRowMap wm(w.values.data(), out, fan);
        RowMatrix& d_cols = cache.cols_scratch;
        d_cols.resize(fan, d_act.cols());
        d_cols.noalias() = wm.transpose() * d_act;
        const int in_size = cache.out_sizes[k - 1];
        RowMatrix& d_prev = cache.grad_scratch[k - 1];
        d_prev.resize(in, static_cast<Eigen::Index>(batch) * in_size * in_size);
        col2im(d_cols, in, batch, in_size, in_size, d_prev.data());
    }
}

Matrix classify_backward(const ModelParams& params, const Matrix& features, const Matrix& probs,
                         const Matrix& d_probs, ModelParams& grads) {
    // Softmax Jacobian: dz = p * (dp - <dp, p>).
    const Eigen::VectorXd inner = (d_probs.array() * probs.array()).rowwise().sum();
    Matrix d_logits = (probs.array() * (d_probs.colwise() - inner).array()).matrix();
    return linear_backward(params.at("classifier.weight"), features, d_logits,
                           grads.at("classifier.weight"), grads.at("classifier.bias"));
}

Matrix regress_backward(const ModelParams& params, const Matrix& features, const Matrix& outputs,
                        const Matrix& d_outputs, ModelParams& grads) {
    Matrix d_z = (d_outputs.array() * outputs.array() * (1.0 - outputs.array())).matrix();
    return linear_backward(params.at("regressor.weight"), features, d_z, grads.at("regressor.weight"),
                           grads.at("regressor.bias"));
}

}  // namespace tactile::model
