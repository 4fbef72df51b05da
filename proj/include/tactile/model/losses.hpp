#pragma once

#include <string>
#include <vector>

#include "tactile/model/network.hpp"

namespace tactile::model {

struct LossWeights {
    double lambda_r = 1.0;
    double lambda_c = 0.0;
    double lambda_t = 0.0;

    void validate() const;
    friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// lambda_r * L_r + lambda_c * L_c + lambda_t * L_t
double total_loss(double regression, double classification, double transfer, const LossWeights& weights);

/// (1/B) sum_i |pred_i - target_i|^2. Optionally writes dL/dpred.
double regression_loss(const Matrix& pred, const Matrix& target, Matrix* d_pred = nullptr);

inline constexpr double kLogFloor = 1e-12;

/// Mean over rows of -sum_c y_ic log(max(p_ic, 1e-12)). Optionally writes dL/dprobs.
double classification_loss(const Matrix& probs, const Matrix& onehot, Matrix* d_probs = nullptr);

/// Multi-bandwidth Gaussian kernel. The base bandwidth is the mean squared
/// distance over off-diagonal pairs; bandwidth i is base * mul^(i - num/2).
struct KernelParams {
    double kernel_mul = 2.0;
    int kernel_num = 5;
};

/// Kernel matrix of the rows of Z (at least two rows).
Matrix multi_gaussian_kernel(const Matrix& z, const KernelParams& params = {});
/// Bandwidths used for `z`, ascending.
std::vector<double> kernel_bandwidths(const Matrix& z, const KernelParams& params = {});

struct TransferGrad {
    Matrix d_source;  // dL/df_s
    Matrix d_target;  // dL/df_t
    Matrix d_probs;   // dL/dprobs_t (LMMD only; empty otherwise)
};

/// Local MMD between class-conditional distributions. Source weights come
/// from one-hot labels, target weights from classifier probabilities, each
/// normalised per class over its batch. A class is active when some source
/// row is labelled with it and some target row predicts it (argmax); the sum
/// runs over active classes and is averaged over them (0 if none).
/// Gradients are exact, including the dependence of the bandwidth on the
/// features and of the target weights on the probabilities. The active set
/// is piecewise constant and contributes no gradient.
double lmmd(const Matrix& f_source, const Matrix& onehot_source, const Matrix& f_target,
            const Matrix& probs_target, const KernelParams& params = {}, TransferGrad* grad = nullptr);

/// Biased MMD^2 with uniform weights: mean K_ss + mean K_tt - 2 mean K_st.
double mmd_global(const Matrix& f_source, const Matrix& f_target, const KernelParams& params = {},
                  TransferGrad* grad = nullptr);

/// |Cov(f_s) - Cov(f_t)|_F^2 / (4 D^2) with unbiased covariances.
double coral_distance(const Matrix& f_source, const Matrix& f_target, TransferGrad* grad = nullptr);

enum class TransferLoss { Lmmd, Mmd, Coral };

std::string to_string(TransferLoss loss);
TransferLoss transfer_loss_from_string(const std::string& text);

}  // namespace tactile::model
