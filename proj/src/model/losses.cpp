#include "tactile/model/losses.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/core/error.hpp"

namespace tactile::model {

namespace {

constexpr double kMinBandwidth = 1e-12;

struct KernelEval {
    Matrix dist;  // squared distances
    Matrix k;
    double base = 0.0;
    bool clamped = false;
    std::vector<double> bandwidths;
};

Matrix pairwise_sq_dist(const Matrix& z) {
    const Eigen::Index n = z.rows();
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (z.row(i) - z.row(j)).squaredNorm();
    return d;
}

// Sum in ascending order so the result does not depend on row order.
double sorted_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

double block_mean(const Eigen::Ref<const Matrix>& block) {
    std::vector<double> values(static_cast<std::size_t>(block.size()));
    Eigen::Map<Matrix>(values.data(), block.rows(), block.cols()) = block;
    return sorted_sum(std::move(values)) / static_cast<double>(block.size());
}

KernelEval evaluate_kernel(const Matrix& z, const KernelParams& params) {
    const Eigen::Index n = z.rows();
    if (n < 2) throw InputError("kernel needs at least two rows");
    if (params.kernel_num < 1 || !(params.kernel_mul > 0))
        throw InputError("invalid kernel parameters");
    KernelEval e;
    e.dist = pairwise_sq_dist(z);
    std::vector<double> off_diagonal;
    off_diagonal.reserve(static_cast<std::size_t>(n * n - n));
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != j) off_diagonal.push_back(e.dist(i, j));
    e.base = sorted_sum(std::move(off_diagonal)) / static_cast<double>(n * n - n);
    if (e.base < kMinBandwidth) {
        e.base = kMinBandwidth;
        e.clamped = true;
    }
    const int half = params.kernel_num / 2;
    e.k = Matrix::Zero(n, n);
    for (int i = 0; i < params.kernel_num; ++i) {
        const double bw = e.base * std::pow(params.kernel_mul, i - half);
        e.bandwidths.push_back(bw);
        e.k.array() += (-e.dist.array() / bw).exp();
    }
    return e;
}

// Gradient of sum_ij M_ij K_ij with respect to the rows of z, M symmetric.
Matrix kernel_backward(const Matrix& z, const KernelEval& e, const Matrix& m) {
    const Eigen::Index n = z.rows();
    Matrix d_dist = Matrix::Zero(n, n);  // partial wrt dist at fixed bandwidth
    double d_base = 0.0;
    for (double bw : e.bandwidths) {
        const Eigen::ArrayXXd g = (-e.dist.array() / bw).exp();
        d_dist.array() -= m.array() * g / bw;
        if (!e.clamped) d_base += (m.array() * g * e.dist.array()).sum() / (bw * e.base);
    }
    Matrix a = d_dist;
    a.array() += d_base / static_cast<double>(n * n - n);
    a.diagonal().setZero();
    const Eigen::VectorXd row_sums = a.rowwise().sum();
    return 4.0 * (row_sums.asDiagonal() * z - a * z);
}

void check_features(const Matrix& fs, const Matrix& ft) {
    if (fs.cols() != ft.cols()) throw InputError("source and target feature dimensions differ");
    if (fs.rows() < 1 || ft.rows() < 1) throw InputError("empty feature batch");
}

}  // namespace

void LossWeights::validate() const {
    if (!(lambda_r >= 0) || !(lambda_c >= 0) || !(lambda_t >= 0))
        throw InputError("loss weights must be nonnegative");
}

double total_loss(double regression, double classification, double transfer, const LossWeights& w) {
    return w.lambda_r * regression + w.lambda_c * classification + w.lambda_t * transfer;
}

double regression_loss(const Matrix& pred, const Matrix& target, Matrix* d_pred) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw InputError("regression prediction and target shapes differ");
    if (pred.rows() == 0) throw InputError("empty regression batch");
    const double b = static_cast<double>(pred.rows());
    const Matrix diff = pred - target;
    if (d_pred) *d_pred = 2.0 * diff / b;
    return diff.squaredNorm() / b;
}

double classification_loss(const Matrix& probs, const Matrix& onehot, Matrix* d_probs) {
    if (probs.rows() != onehot.rows() || probs.cols() != onehot.cols())
        throw InputError("classification probabilities and labels differ in shape");
    if (probs.rows() == 0) throw InputError("empty classification batch");
    const double b = static_cast<double>(probs.rows());
    double loss = 0.0;
    if (d_probs) d_probs->setZero(probs.rows(), probs.cols());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            const double y = onehot(i, c);
            if (y == 0.0) continue;
            const double p = probs(i, c);
            if (p > kLogFloor) {
                loss -= y * std::log(p);
                if (d_probs) (*d_probs)(i, c) = -y / (p * b);
            } else {
                loss -= y * std::log(kLogFloor);
            }
        }
    }
    return loss / b;
}

Matrix multi_gaussian_kernel(const Matrix& z, const KernelParams& params) {
    return evaluate_kernel(z, params).k;
}

std::vector<double> kernel_bandwidths(const Matrix& z, const KernelParams& params) {
    return evaluate_kernel(z, params).bandwidths;
}

double lmmd(const Matrix& fs, const Matrix& ys, const Matrix& ft, const Matrix& pt,
            const KernelParams& params, TransferGrad* grad) {
    check_features(fs, ft);
    if (ys.rows() != fs.rows() || pt.rows() != ft.rows() || ys.cols() != pt.cols())
        throw InputError("lmmd label/probability shapes do not match the features");
    const Eigen::Index bs = fs.rows();
    const Eigen::Index bt = ft.rows();
    const Eigen::Index n = bs + bt;

    const Eigen::RowVectorXd mass_s = ys.colwise().sum();
    const Eigen::RowVectorXd mass_t = pt.colwise().sum();
    std::vector<char> predicted(static_cast<std::size_t>(pt.cols()), 0);
    for (Eigen::Index i = 0; i < bt; ++i) {
        Eigen::Index best = 0;
        pt.row(i).maxCoeff(&best);
        predicted[static_cast<std::size_t>(best)] = 1;
    }
    std::vector<Eigen::Index> active;
    for (Eigen::Index c = 0; c < ys.cols(); ++c)
        if (mass_s(c) > 0.0 && mass_t(c) > 0.0 && predicted[static_cast<std::size_t>(c)]) active.push_back(c);

    if (grad) {
        grad->d_source = Matrix::Zero(bs, fs.cols());
        grad->d_target = Matrix::Zero(bt, ft.cols());
        grad->d_probs = Matrix::Zero(pt.rows(), pt.cols());
    }
    if (active.empty()) return 0.0;

    // u_c = [w_s^c ; -w_t^c], M = (1/|C|) sum_c u_c u_c^T
    const auto classes = static_cast<Eigen::Index>(active.size());
    Matrix u(n, classes);
    for (Eigen::Index k = 0; k < classes; ++k) {
        const Eigen::Index c = active[static_cast<std::size_t>(k)];
        u.col(k).head(bs) = ys.col(c) / mass_s(c);
        u.col(k).tail(bt) = -pt.col(c) / mass_t(c);
    }
    const double scale = 1.0 / static_cast<double>(classes);

    Matrix z(n, fs.cols());
    z << fs, ft;
    const KernelEval e = evaluate_kernel(z, params);
    const Matrix ku = e.k * u;
    const double loss = scale * (u.array() * ku.array()).sum();

    if (grad) {
        const Matrix m = scale * u * u.transpose();
        const Matrix dz = kernel_backward(z, e, m);
        grad->d_source = dz.topRows(bs);
        grad->d_target = dz.bottomRows(bt);
        // dL/du = 2 scale K u; the target block of u is -p / mass.
        const Matrix du_t = 2.0 * scale * ku.bottomRows(bt);
        for (Eigen::Index k = 0; k < classes; ++k) {
            const Eigen::Index c = active[static_cast<std::size_t>(k)];
            const double mass = mass_t(c);
            const Eigen::VectorXd dw = -du_t.col(k);  // dL/dw_t
            const double coupling = dw.dot(pt.col(c)) / (mass * mass);
            grad->d_probs.col(c) = (dw / mass).array() - coupling;
        }
    }
    return loss;
}

double mmd_global(const Matrix& fs, const Matrix& ft, const KernelParams& params, TransferGrad* grad) {
    check_features(fs, ft);
    const Eigen::Index bs = fs.rows();
    const Eigen::Index bt = ft.rows();
    Matrix z(bs + bt, fs.cols());
    z << fs, ft;
    const KernelEval e = evaluate_kernel(z, params);
    const double loss = block_mean(e.k.topLeftCorner(bs, bs)) + block_mean(e.k.bottomRightCorner(bt, bt)) -
                        2.0 * block_mean(e.k.topRightCorner(bs, bt));
    if (grad) {
        Eigen::VectorXd u(bs + bt);
        u.head(bs).setConstant(1.0 / static_cast<double>(bs));
        u.tail(bt).setConstant(-1.0 / static_cast<double>(bt));
        const Matrix dz = kernel_backward(z, e, u * u.transpose());
        grad->d_source = dz.topRows(bs);
        grad->d_target = dz.bottomRows(bt);
        grad->d_probs.resize(0, 0);
    }
    return loss;
}

double coral_distance(const Matrix& fs, const Matrix& ft, TransferGrad* grad) {
    check_features(fs, ft);
    if (fs.rows() < 2 || ft.rows() < 2) throw InputError("coral needs at least two rows per domain");
    const double d = static_cast<double>(fs.cols());
    const Matrix cs_centered = fs.rowwise() - fs.colwise().mean();
    const Matrix ct_centered = ft.rowwise() - ft.colwise().mean();
    const Matrix cov_s = cs_centered.transpose() * cs_centered / static_cast<double>(fs.rows() - 1);
    const Matrix cov_t = ct_centered.transpose() * ct_centered / static_cast<double>(ft.rows() - 1);
    const Matrix diff = cov_s - cov_t;
    const double loss = diff.squaredNorm() / (4.0 * d * d);
    if (grad) {
        const Matrix d_cov = diff / (2.0 * d * d);
        grad->d_source = 2.0 / static_cast<double>(fs.rows() - 1) * cs_centered * d_cov;
        grad->d_target = -2.0 / static_cast<double>(ft.rows() - 1) * ct_centered * d_cov;
        grad->d_probs.resize(0, 0);
    }
    return loss;
}

std::string to_string(TransferLoss loss) {
    switch (loss) {
        case TransferLoss::Lmmd: return "lmmd";
        case TransferLoss::Mmd: return "mmd";
        case TransferLoss::Coral: return "coral";
    }
    return "lmmd";
}

TransferLoss transfer_loss_from_string(const std::string& text) {
    if (text == "lmmd") return TransferLoss::Lmmd;
    if (text == "mmd") return TransferLoss::Mmd;
    if (text == "coral") return TransferLoss::Coral;
    throw InputError("unknown transfer loss '" + text + "' (expected lmmd, mmd or coral)");
}

}  // namespace tactile::model
