#include "tactile/train/optimizer.hpp"

#include <cmath>

#include "tactile/core/error.hpp"

namespace tactile::train {

double lr_schedule(double eta0, long iteration, const Schedule& schedule) {
    if (iteration < 0) throw InputError("iteration must be >= 0");
    return eta0 * std::pow(1.0 + schedule.a * static_cast<double>(iteration), -schedule.p);
}

void sgd_momentum_step(model::ModelParams& params, const model::ModelParams& grads,
                       model::ModelParams& velocity, double lr, const GroupFactors& factors,
                       double momentum) {
    auto& theta = params.tensors();
    const auto& g = grads.tensors();
    auto& v = velocity.tensors();
    if (theta.size() != g.size() || theta.size() != v.size())
        throw InputError("optimizer tensors do not line up with the parameters");
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (theta[k].size() != g[k].size() || theta[k].size() != v[k].size() || theta[k].name != g[k].name)
            throw InputError("optimizer shape mismatch at " + theta[k].name);
        const double step =
            lr * (theta[k].group == model::ParamGroup::Backbone ? factors.backbone : factors.head);
        for (std::size_t i = 0; i < theta[k].size(); ++i) {
            v[k].values[i] = momentum * v[k].values[i] + g[k].values[i];
            theta[k].values[i] -= step * v[k].values[i];
        }
    }
}

}  // namespace tactile::train
