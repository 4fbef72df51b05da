#pragma once

#include "tactile/core/types.hpp"
#include "tactile/model/network.hpp"
#include "tactile/sim/dataset.hpp"

namespace tactile::train {

enum class ScaleDirection { Normalize, Denormalize };

/// Per-axis min-max map: normalize (f - min)/(max - min), denormalize is
/// the exact inverse. `forces` is N x 3 (fx, fy, fz).
model::Matrix scale_forces(const model::Matrix& forces, const NormalizationSpec& spec,
                           ScaleDirection direction);

/// Min/max of the force labels of a labeled dataset.
NormalizationSpec normalization_from_labels(const sim::Dataset& dataset);

/// N x 3 matrix of force labels in newtons; throws InputError on any
/// unlabeled sample.
model::Matrix force_matrix(const sim::Dataset& dataset);

}  // namespace tactile::train
