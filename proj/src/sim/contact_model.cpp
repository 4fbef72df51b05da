#include "tactile/sim/contact_model.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/core/error.hpp"

namespace tactile::sim {

namespace {

// E*_0 such that (4/3) E* sqrt(R) * 1^{3/2} = 3 N.
const double kBaseModulus = kMaxNormalForceN / ((4.0 / 3.0) * std::sqrt(kIndenterRadiusMm));

// c such that c E*_0 sqrt(1 mm) * 0.6 mm = 0.75 N.
const double kTangentialCoeff =
    kMaxShearForceN / (kBaseModulus * std::sqrt(kCalibrationDepthMm) * kCalibrationLateralMm);

}  // namespace

double effective_modulus(int elastomer_index) {
    static constexpr double kRatio[] = {1.0, 1.25, 1.5};
    if (elastomer_index < 0 || elastomer_index > 2)
        throw InputError("elastomer_index must be in {0,1,2}");
    return kBaseModulus * kRatio[elastomer_index];
}

double hertz_normal_force(double depth_mm, int elastomer_index) {
    if (!(depth_mm >= 0.0)) throw InputError("indentation depth must be >= 0");
    const double modulus = effective_modulus(elastomer_index);
    return -(4.0 / 3.0) * modulus * std::sqrt(kIndenterRadiusMm) * std::pow(depth_mm, 1.5);
}

std::array<double, 2> shear_force(std::array<double, 2> lateral_mm, double depth_mm,
                                  int elastomer_index, double max_radius_mm) {
    const double displacement = std::hypot(lateral_mm[0], lateral_mm[1]);
    if (displacement > max_radius_mm + 1e-12)
        throw InputError("lateral displacement exceeds the path's maximum radius");
    if (displacement == 0.0 || depth_mm == 0.0) {
        if (!(depth_mm >= 0.0)) throw InputError("indentation depth must be >= 0");
        return {0.0, 0.0};
    }
    const double stiffness = kTangentialCoeff * effective_modulus(elastomer_index) * std::sqrt(depth_mm);
    const double cone = kFrictionCoefficient * std::abs(hertz_normal_force(depth_mm, elastomer_index));
    const double magnitude = std::min(stiffness * displacement, cone);
    return {magnitude * lateral_mm[0] / displacement, magnitude * lateral_mm[1] / displacement};
}

}  // namespace tactile::sim
