#pragma once

#include <array>
#include <cstdint>

#include "tactile/core/image.hpp"
#include "tactile/core/types.hpp"
#include "tactile/sim/path.hpp"

namespace tactile::sim {

/// Appearance model of a GelSight-like sensor image.
///
/// Intensity of channel c at pixel p (coordinates in mm):
///
///   I_c(p) = base_c + gain_c * depth * g(p) * (A + S * <p - q, lateral> / sigma^2)
///
/// where q = surface point + lateral is the bump centre and
/// g(p) = exp(-|p - q|^2 / (2 sigma^2)). The second term is the shading
/// asymmetry of a dragged membrane; it makes the shear direction visible
/// without markers. Markers are dark disks on an 8x6 grid; those within
/// 2 sigma of the bump centre follow 0.8 x lateral. Gaussian pixel noise is
/// added last and the result is clipped to [0,1].
struct RenderOptions {
    int height = 64;
    int width = 64;
    double surface_w_mm = 10.0;
    double surface_h_mm = 8.0;
    double noise_sigma = 0.01;
    bool noise = true;
};

struct Illumination {
    std::array<double, 3> base;
    std::array<double, 3> gain;
};

inline constexpr double kBumpAmplitude = 0.35;
inline constexpr double kShearShading = 0.15;
inline constexpr double kBumpSigmaMm = 0.8;
inline constexpr int kMarkerCols = 8;
inline constexpr int kMarkerRows = 6;
inline constexpr double kMarkerRadiusPx = 2.0;
inline constexpr float kMarkerIntensity = 0.1f;
inline constexpr double kMarkerShiftFactor = 0.8;
/// Pixels whose channel mean falls below this are treated as marker pixels.
inline constexpr float kMarkerDarkness = 0.25f;

Illumination illumination(int illumination_index);
/// Bump width for an elastomer; stiffer gels give a tighter bump.
double bump_sigma_mm(int elastomer_index);

struct RenderedImage {
    Image image;
    PixelMask marker_mask;
};

/// Renders `point` in `domain`. The noise stream is derived from
/// (rng_seed, stream), so distinct samples must use distinct streams.
RenderedImage render_with_mask(const ContactPoint& point, const DomainConfig& domain,
                               std::uint64_t rng_seed, std::uint64_t stream,
                               const RenderOptions& options = {});

Image render_tactile_image(const ContactPoint& point, const DomainConfig& domain,
                           std::uint64_t rng_seed, std::uint64_t stream,
                           const RenderOptions& options = {});

/// Marker pixels by darkness thresholding (channel mean < kMarkerDarkness).
PixelMask detect_marker_mask(const Image& image, float threshold = kMarkerDarkness);

}  // namespace tactile::sim
