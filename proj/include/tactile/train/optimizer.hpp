#pragma once

#include "tactile/model/network.hpp"

namespace tactile::train {

/// Inverse-decay schedule eta0 * (1 + a*i)^(-p).
struct Schedule {
    double a = 0.0003;
    double p = 0.75;
    friend bool operator==(const Schedule&, const Schedule&) = default;
};

double lr_schedule(double eta0, long iteration, const Schedule& schedule = {});

/// Learning-rate multiplier per parameter group.
struct GroupFactors {
    double backbone = 0.1;
    double head = 1.0;
};

/// Heavy-ball SGD: v <- momentum * v + g; theta <- theta - lr * factor * v.
/// `velocity` must have the same layout as `params` (zero on the first step).
void sgd_momentum_step(model::ModelParams& params, const model::ModelParams& grads,
                       model::ModelParams& velocity, double lr, const GroupFactors& factors,
                       double momentum = 0.9);

}  // namespace tactile::train
