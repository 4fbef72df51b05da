#pragma once

#include "tactile/core/image.hpp"

namespace tactile::sim {

struct InpaintOptions {
    double tolerance = 1e-4;   // stop when max per-pixel change drops below this
    int max_sweeps = 100000;
};

/// Diffusion fill of masked pixels: each masked pixel is repeatedly set to
/// the mean of its 4-neighbours (Gauss-Seidel, raster order) until the
/// largest update is below `tolerance`. Unmasked pixels are never touched.
/// Throws InputError if the mask covers the whole image or mismatches it.
Image inpaint_markers(const Image& image, const PixelMask& mask, const InpaintOptions& options = {});

}  // namespace tactile::sim
