#include "tactile/sim/path.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tactile/core/error.hpp"

namespace tactile::sim {

double PathSpec::max_radius() const {
    return radii_mm.empty() ? 0.0 : *std::max_element(radii_mm.begin(), radii_mm.end());
}

std::array<double, 2> PathSpec::surface_xy(int surface_index) const {
    const int ix = surface_index % grid_nx;
    const int iy = surface_index / grid_nx;
    return {(ix + 0.5) * surface_w_mm / grid_nx, (iy + 0.5) * surface_h_mm / grid_ny};
}

void PathSpec::validate() const {
    if (grid_nx < 1 || grid_ny < 1) throw InputError("path grid must be at least 1x1");
    if (!(surface_w_mm > 0) || !(surface_h_mm > 0)) throw InputError("surface size must be positive");
    if (n_angles < 1) throw InputError("n_angles must be >= 1");
    if (depths_mm.empty() || radii_mm.empty())
        throw InputError("path needs at least one depth and one radius");
    for (double d : depths_mm)
        if (!(d > 0) || !std::isfinite(d)) throw InputError("path depths must be positive");
    for (double r : radii_mm)
        if (!(r > 0) || !std::isfinite(r)) throw InputError("path radii must be positive");
    if (!std::is_sorted(radii_mm.begin(), radii_mm.end()))
        throw InputError("path radii must be ascending");
}

PathSpec full_path() { return PathSpec{}; }

PathSpec sparse_path() {
    PathSpec spec;
    spec.grid_nx = 3;
    spec.grid_ny = 3;
    spec.depths_mm = {0.5, 1.0};
    spec.radii_mm = {0.3, 0.6};
    spec.n_angles = 12;
    return spec;
}

std::vector<ContactPoint> generate_contact_path(const PathSpec& spec) {
    spec.validate();
    std::vector<ContactPoint> path;
    path.reserve(spec.total_points());
    for (int s = 0; s < spec.surface_points(); ++s) {
        const auto xy = spec.surface_xy(s);
        path.push_back(ContactPoint{s, xy, 0.0, {0.0, 0.0}, 0});
        int cls = 1;
        for (double depth : spec.depths_mm) {
            for (double radius : spec.radii_mm) {
                for (int a = 0; a < spec.n_angles; ++a) {
                    const double theta = 2.0 * std::numbers::pi * a / spec.n_angles;
                    path.push_back(ContactPoint{
                        s, xy, depth, {radius * std::cos(theta), radius * std::sin(theta)}, cls++});
                }
            }
        }
    }
    return path;
}

std::vector<double> assign_contact_class(const ContactPoint& point, const PathSpec& spec) {
    const int n = spec.points_per_surface();
    if (point.class_index < 0 || point.class_index >= n)
        throw InputError("class_index " + std::to_string(point.class_index) +
                         " outside [0, " + std::to_string(n) + ")");
    std::vector<double> onehot(static_cast<std::size_t>(n), 0.0);
    onehot[static_cast<std::size_t>(point.class_index)] = 1.0;
    return onehot;
}

}  // namespace tactile::sim
