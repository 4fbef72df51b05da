#include "tactile/train/normalization.hpp"

#include <algorithm>
#include <limits>

#include "tactile/core/error.hpp"

namespace tactile::train {

model::Matrix scale_forces(const model::Matrix& forces, const NormalizationSpec& spec,
                           ScaleDirection direction) {
    spec.validate();
    if (forces.cols() != 3) throw InputError("force matrix must have three columns");
    model::Matrix out(forces.rows(), 3);
    for (int a = 0; a < 3; ++a) {
        const double range = spec.range(a);
        if (direction == ScaleDirection::Normalize)
            out.col(a) = (forces.col(a).array() - spec.min[a]) / range;
        else
            out.col(a) = forces.col(a).array() * range + spec.min[a];
    }
    return out;
}

NormalizationSpec normalization_from_labels(const sim::Dataset& dataset) {
    if (dataset.empty()) throw InputError("cannot derive normalization from an empty dataset");
    NormalizationSpec spec;
    spec.min.fill(std::numeric_limits<double>::infinity());
    spec.max.fill(-std::numeric_limits<double>::infinity());
    for (const auto& s : dataset.samples) {
        if (!s.force) throw InputError("sample " + s.id + " has no force label");
        const auto f = s.force->as_array();
        for (int a = 0; a < 3; ++a) {
            spec.min[a] = std::min(spec.min[a], f[a]);
            spec.max[a] = std::max(spec.max[a], f[a]);
        }
    }
    spec.validate();
    return spec;
}

model::Matrix force_matrix(const sim::Dataset& dataset) {
    model::Matrix f(static_cast<Eigen::Index>(dataset.size()), 3);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& s = dataset.samples[i];
        if (!s.force) throw InputError("sample " + s.id + " has no force label");
        f(static_cast<Eigen::Index>(i), 0) = s.force->fx;
        f(static_cast<Eigen::Index>(i), 1) = s.force->fy;
        f(static_cast<Eigen::Index>(i), 2) = s.force->fz;
    }
    return f;
}

}  // namespace tactile::train
