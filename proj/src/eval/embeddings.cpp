#include "tactile/eval/embeddings.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

#include "tactile/core/atomic_file.hpp"
#include "tactile/core/error.hpp"
#include "tactile/train/trainer.hpp"

namespace tactile::eval {

Embeddings compute_embeddings(const model::ModelParams& params, const sim::Dataset& source,
                              const sim::Dataset& target) {
    if (source.empty() && target.empty()) throw InputError("no samples to embed");
    const model::Matrix fs = train::extract_features(params, source);
    const model::Matrix ft = train::extract_features(params, target);
    Embeddings e;
    e.features.resize(fs.rows() + ft.rows(), params.config().bottleneck_dim);
    e.features << fs, ft;
    for (const auto* ds : {&source, &target})
        for (const auto& s : ds->samples) {
            e.domain.push_back(ds == &source ? "source" : "target");
            e.class_index.push_back(s.class_index.value_or(-1));
        }
    e.pca = pca_project(e.features, 2);
    return e;
}

model::Matrix pca_project(const model::Matrix& x, int k) {
    if (k < 1 || k > x.cols()) throw InputError("invalid number of principal components");
    const model::Matrix centred = x.rowwise() - x.colwise().mean();
    if (x.rows() < 2) return model::Matrix::Zero(x.rows(), k);
    const model::Matrix cov = centred.transpose() * centred / static_cast<double>(x.rows() - 1);
    const Eigen::SelfAdjointEigenSolver<model::Matrix> solver(cov);
    if (solver.info() != Eigen::Success) throw InputError("PCA eigen-decomposition failed");
    // Eigenvalues come in increasing order.
    model::Matrix axes(x.cols(), k);
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd v = solver.eigenvectors().col(x.cols() - 1 - i);
        Eigen::Index peak = 0;
        v.cwiseAbs().maxCoeff(&peak);
        if (v(peak) < 0) v = -v;
        axes.col(i) = v;
    }
    return centred * axes;
}

double centroid_distance(const model::Matrix& a, const model::Matrix& b) {
    if (a.rows() == 0 || b.rows() == 0 || a.cols() != b.cols()) throw InputError("centroid_distance shape mismatch");
    return (a.colwise().mean() - b.colwise().mean()).norm();
}

void write_embeddings_csv(const Embeddings& e, std::ostream& out) {
    out << "domain,class_index";
    for (Eigen::Index j = 0; j < e.features.cols(); ++j) out << ",f" << j;
    out << ",pca1,pca2\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < e.features.rows(); ++i) {
        const auto r = static_cast<std::size_t>(i);
        out << e.domain[r] << ',' << e.class_index[r];
        for (Eigen::Index j = 0; j < e.features.cols(); ++j) out << ',' << e.features(i, j);
        out << ',' << e.pca(i, 0) << ',' << e.pca(i, 1) << '\n';
    }
}

void export_embeddings(const Embeddings& e, const std::filesystem::path& path, bool overwrite) {
    std::ostringstream ss;
    write_embeddings_csv(e, ss);
    write_file_atomic(path, ss.str(), overwrite);
}

}  // namespace tactile::eval
