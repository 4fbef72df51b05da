#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tactile/core/types.hpp"
#include "tactile/model/network.hpp"

namespace tactile::eval {

inline constexpr std::array<const char*, 3> kAxisNames{"fx", "fy", "fz"};

/// Mean absolute error per column of two N x 3 force matrices (newtons).
std::array<double, 3> mae_per_axis(const model::Matrix& pred, const model::Matrix& truth);

/// Coefficient of determination; may be negative. A constant `truth` makes
/// it undefined: returns NaN and appends a message to `warnings` if given.
double r_squared(std::span<const double> pred, std::span<const double> truth,
                 std::vector<std::string>* warnings = nullptr);

/// mae / (max - min) * 100 for one axis of the source range.
double pct_of_range(double mae, int axis, const NormalizationSpec& range);

/// One decimal, ties away from zero ("3.4").
std::string format_one_decimal(double value);

}  // namespace tactile::eval
