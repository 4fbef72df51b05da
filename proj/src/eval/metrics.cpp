#include "tactile/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "tactile/core/error.hpp"

namespace tactile::eval {

std::array<double, 3> mae_per_axis(const model::Matrix& pred, const model::Matrix& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != 3 || truth.cols() != 3)
        throw InputError("mae_per_axis expects two N x 3 matrices of equal size");
    if (pred.rows() == 0) throw InputError("mae_per_axis needs at least one row");
    std::array<double, 3> out{};
    for (int a = 0; a < 3; ++a) out[a] = (pred.col(a) - truth.col(a)).cwiseAbs().mean();
    return out;
}

double r_squared(std::span<const double> pred, std::span<const double> truth, std::vector<std::string>* warnings) {
    if (pred.size() != truth.size()) throw InputError("r_squared inputs differ in length");
    if (truth.size() < 2) throw InputError("r_squared needs at least two samples");
    double mean = 0.0;
    for (double t : truth) mean += t;
    mean /= static_cast<double>(truth.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ss_res += (pred[i] - truth[i]) * (pred[i] - truth[i]);
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    if (ss_tot == 0.0) {
        if (warnings) warnings->push_back("R^2 undefined: ground truth is constant");
        return std::numeric_limits<double>::quiet_NaN();
    }
    return 1.0 - ss_res / ss_tot;
}

double pct_of_range(double mae, int axis, const NormalizationSpec& range) {
    if (axis < 0 || axis > 2) throw InputError("axis must be 0, 1 or 2");
    range.validate();
    return mae / range.range(axis) * 100.0;
}

std::string format_one_decimal(double value) {
    if (!std::isfinite(value)) return "nan";
    // The nudge keeps ties such as 6.25 from falling to 6.2 when the binary
    // value sits a hair below the decimal one.
    const double scaled = std::abs(value) * 10.0;
    const double rounded = std::floor(scaled + 0.5 + 1e-9) / 10.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", value < 0 && rounded > 0 ? -rounded : rounded);
    return buf;
}

}  // namespace tactile::eval
