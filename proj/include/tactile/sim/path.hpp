#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace tactile::sim {

/// Geometry of the indentation path: a grid of surface points and, per
/// surface point, a sequence of depths x radii x angles of lateral motion.
struct PathSpec {
    int grid_nx = 6;
    int grid_ny = 5;
    double surface_w_mm = 10.0;
    double surface_h_mm = 8.0;
    std::vector<double> depths_mm{0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> radii_mm{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    int n_angles = 12;

    /// Contact points per surface point, including the reference position.
    int points_per_surface() const {
        return 1 + static_cast<int>(depths_mm.size()) * n_angles * static_cast<int>(radii_mm.size());
    }
    int surface_points() const { return grid_nx * grid_ny; }
    std::size_t total_points() const {
        return static_cast<std::size_t>(surface_points()) * points_per_surface();
    }
    double max_radius() const;
    std::array<double, 2> surface_xy(int surface_index) const;

    void validate() const;

    friend bool operator==(const PathSpec&, const PathSpec&) = default;
};

/// 6x5 grid, 5 depths, 6 radii, 12 angles: 361 points per surface point.
PathSpec full_path();
/// 3x3 grid, depths {0.5, 1.0}, radii {0.3, 0.6}, 12 angles: 49 per point.
PathSpec sparse_path();

struct ContactPoint {
    int surface_index = 0;
    std::array<double, 2> surface_xy{};  // mm
    double depth = 0.0;                  // mm
    std::array<double, 2> lateral{};     // mm
    int class_index = 0;
};

/// Enumerates the indentation path. Per surface point the reference
/// position comes first, then depth-major, radius-ascending, angle-minor.
std::vector<ContactPoint> generate_contact_path(const PathSpec& spec);

/// One-hot encoding of `point.class_index` over `spec.points_per_surface()`.
std::vector<double> assign_contact_class(const ContactPoint& point, const PathSpec& spec);

}  // namespace tactile::sim
