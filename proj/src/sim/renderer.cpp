#include "tactile/sim/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/core/error.hpp"
#include "tactile/core/rng.hpp"

namespace tactile::sim {

Illumination illumination(int illumination_index) {
    static const Illumination kTable[] = {
        {{0.45, 0.42, 0.40}, {1.00, 0.80, 0.60}},
        {{0.38, 0.47, 0.52}, {0.55, 1.00, 0.90}},
        {{0.52, 0.40, 0.50}, {0.85, 0.55, 1.10}},
    };
    if (illumination_index < 0 || illumination_index > 2)
        throw InputError("illumination_index must be in {0,1,2}");
    return kTable[illumination_index];
}

double bump_sigma_mm(int elastomer_index) {
    static constexpr double kScale[] = {1.0, 0.9, 0.8};
    if (elastomer_index < 0 || elastomer_index > 2)
        throw InputError("elastomer_index must be in {0,1,2}");
    return kBumpSigmaMm * kScale[elastomer_index];
}

RenderedImage render_with_mask(const ContactPoint& point, const DomainConfig& domain,
                               std::uint64_t rng_seed, std::uint64_t stream,
                               const RenderOptions& options) {
    domain.validate();
    const int H = options.height;
    const int W = options.width;
    const double mm_per_px_x = options.surface_w_mm / W;
    const double mm_per_px_y = options.surface_h_mm / H;

    const Illumination light = illumination(domain.illumination_index);
    const double sigma = bump_sigma_mm(domain.elastomer_index);
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    const double cx = point.surface_xy[0] + point.lateral[0];
    const double cy = point.surface_xy[1] + point.lateral[1];

    RenderedImage out{Image(H, W), PixelMask(H, W)};
    for (int r = 0; r < H; ++r) {
        const double py = (r + 0.5) * mm_per_px_y - cy;
        for (int c = 0; c < W; ++c) {
            const double px = (c + 0.5) * mm_per_px_x - cx;
            double bump = 0.0;
            if (point.depth > 0.0) {
                const double g = std::exp(-(px * px + py * py) * inv_two_sigma2);
                const double drag = (px * point.lateral[0] + py * point.lateral[1]) / (sigma * sigma);
                bump = point.depth * g * (kBumpAmplitude + kShearShading * drag);
            }
            for (int ch = 0; ch < 3; ++ch)
                out.image.at(r, c, ch) = static_cast<float>(light.base[ch] + light.gain[ch] * bump);
        }
    }

    if (domain.markers) {
        const double shift_x = kMarkerShiftFactor * point.lateral[0] / mm_per_px_x;
        const double shift_y = kMarkerShiftFactor * point.lateral[1] / mm_per_px_y;
        const double radius2 = kMarkerRadiusPx * kMarkerRadiusPx;
        for (int j = 0; j < kMarkerRows; ++j) {
            for (int i = 0; i < kMarkerCols; ++i) {
                double mx = (i + 0.5) * W / kMarkerCols;
                double my = (j + 0.5) * H / kMarkerRows;
                if (point.depth > 0.0) {
                    const double dx = mx * mm_per_px_x - cx;
                    const double dy = my * mm_per_px_y - cy;
                    if (dx * dx + dy * dy <= 4.0 * sigma * sigma) {
                        mx += shift_x;
                        my += shift_y;
                    }
                }
                const int r0 = std::max(0, static_cast<int>(std::floor(my - kMarkerRadiusPx - 1)));
                const int r1 = std::min(H - 1, static_cast<int>(std::ceil(my + kMarkerRadiusPx + 1)));
                const int c0 = std::max(0, static_cast<int>(std::floor(mx - kMarkerRadiusPx - 1)));
                const int c1 = std::min(W - 1, static_cast<int>(std::ceil(mx + kMarkerRadiusPx + 1)));
                for (int r = r0; r <= r1; ++r) {
                    for (int c = c0; c <= c1; ++c) {
                        const double dx = c + 0.5 - mx;
                        const double dy = r + 0.5 - my;
                        if (dx * dx + dy * dy > radius2) continue;
                        out.marker_mask.set(r, c);
                        for (int ch = 0; ch < 3; ++ch) out.image.at(r, c, ch) = kMarkerIntensity;
                    }
                }
            }
        }
    }

    if (options.noise && options.noise_sigma > 0.0) {
        auto rng = make_stream(rng_seed, stream);
        std::normal_distribution<double> noise(0.0, options.noise_sigma);
        for (float& v : out.image.data()) v = static_cast<float>(v + noise(rng));
    }
    for (float& v : out.image.data()) v = std::clamp(v, 0.0f, 1.0f);
    return out;
}

Image render_tactile_image(const ContactPoint& point, const DomainConfig& domain,
                           std::uint64_t rng_seed, std::uint64_t stream,
                           const RenderOptions& options) {
    return render_with_mask(point, domain, rng_seed, stream, options).image;
}

PixelMask detect_marker_mask(const Image& image, float threshold) {
    PixelMask mask(image.height(), image.width());
    for (int r = 0; r < image.height(); ++r)
        for (int c = 0; c < image.width(); ++c) {
            const float mean = (image.at(r, c, 0) + image.at(r, c, 1) + image.at(r, c, 2)) / 3.0f;
            if (mean < threshold) mask.set(r, c);
        }
    return mask;
}

}  // namespace tactile::sim
