#pragma once

#include <array>

namespace tactile::sim {

// Hertzian sphere-on-flat contact calibrated to the indenter of the rig
// (3 mm sphere) and to a 3 N normal / 0.75 N shear working range.
inline constexpr double kIndenterRadiusMm = 1.5;
inline constexpr double kFrictionCoefficient = 0.3;
inline constexpr double kMaxNormalForceN = 3.0;       // at 1 mm, elastomer 0
inline constexpr double kMaxShearForceN = 0.75;       // at 1 mm / 0.6 mm, elastomer 0
inline constexpr double kCalibrationDepthMm = 1.0;
inline constexpr double kCalibrationLateralMm = 0.6;

/// Effective modulus E* (N/mm^2) of elastomer 0, 1, 2; ratio 1 : 1.25 : 1.5.
double effective_modulus(int elastomer_index);

/// Normal force fz = -(4/3) E* sqrt(R) d^{3/2}; zero at zero depth.
double hertz_normal_force(double depth_mm, int elastomer_index);

/// Tangential force parallel to `lateral`, magnitude
/// min(k_t |lateral|, mu |fz|) with k_t = c E* sqrt(depth).
std::array<double, 2> shear_force(std::array<double, 2> lateral_mm, double depth_mm,
                                  int elastomer_index,
                                  double max_radius_mm = kCalibrationLateralMm);

}  // namespace tactile::sim
