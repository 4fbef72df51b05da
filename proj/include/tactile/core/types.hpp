#pragma once

#include <array>
#include <string>

namespace tactile {

/// Identifies a sensor domain: marker presence, illumination and elastomer.
struct DomainConfig {
    bool markers = true;
    int illumination_index = 0;  // {0,1,2}
    int elastomer_index = 0;     // {0,1,2}, higher = stiffer

    /// Throws InputError when an index is out of range.
    void validate() const;

    /// Short name in the `m`/`wm` + `b`/`i` notation, e.g. "mb0i0".
    std::string label() const;

    friend bool operator==(const DomainConfig&, const DomainConfig&) = default;
};

/// Contact force in newtons. fz is compressive (<= 0).
struct ForceLabel {
    double fx = 0.0;
    double fy = 0.0;
    double fz = 0.0;

    std::array<double, 3> as_array() const { return {fx, fy, fz}; }
    friend bool operator==(const ForceLabel&, const ForceLabel&) = default;
};

/// Per-axis (min, max) of source-domain force labels, in newtons.
struct NormalizationSpec {
    std::array<double, 3> min{};
    std::array<double, 3> max{};

    double range(int axis) const { return max[axis] - min[axis]; }
    /// Throws InputError if any axis is non-finite or has max <= min.
    void validate() const;

    friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

}  // namespace tactile
