#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "tactile/model/network.hpp"
#include "tactile/sim/dataset.hpp"

namespace tactile::eval {

/// Bottleneck features of source then target samples with a 2-D PCA of
/// their union.
struct Embeddings {
    model::Matrix features;  // N x D
    model::Matrix pca;       // N x 2
    std::vector<std::string> domain;  // "source" or "target"
    std::vector<int> class_index;     // -1 when unlabeled
};

Embeddings compute_embeddings(const model::ModelParams& params, const sim::Dataset& source,
                              const sim::Dataset& target);

/// Projection of the centred rows of `x` on its top `k` principal axes.
/// Each axis is signed so that its largest-magnitude loading is positive.
model::Matrix pca_project(const model::Matrix& x, int k);

/// Euclidean distance between the row means of two feature matrices.
double centroid_distance(const model::Matrix& a, const model::Matrix& b);

/// CSV: domain,class_index,f0..f{D-1},pca1,pca2
void write_embeddings_csv(const Embeddings& e, std::ostream& out);
void export_embeddings(const Embeddings& e, const std::filesystem::path& path, bool overwrite);

}  // namespace tactile::eval
