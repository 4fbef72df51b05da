#include "tactile/sim/inpaint.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tactile/core/error.hpp"

namespace tactile::sim {

Image inpaint_markers(const Image& image, const PixelMask& mask, const InpaintOptions& options) {
    if (mask.height != image.height() || mask.width != image.width())
        throw InputError("inpaint mask shape does not match image");
    const std::size_t masked = mask.count();
    if (masked == 0) return image;
    if (masked == static_cast<std::size_t>(image.height()) * image.width())
        throw InputError("inpaint mask covers the entire image");

    const int H = image.height();
    const int W = image.width();
    std::vector<int> holes;
    holes.reserve(masked);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            if (mask(r, c)) holes.push_back(r * W + c);

    // Work in double; start holes at the mean of the known pixels.
    std::vector<double> px(image.data().begin(), image.data().end());
    for (int ch = 0; ch < 3; ++ch) {
        double sum = 0.0;
        std::size_t n = 0;
        for (int i = 0; i < H * W; ++i)
            if (!mask.bits[i]) sum += px[i * 3 + ch], ++n;
        const double mean = sum / static_cast<double>(n);
        for (int idx : holes) px[idx * 3 + ch] = mean;
    }

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (int idx : holes) {
            const int r = idx / W;
            const int c = idx % W;
            int neighbours[4];
            int count = 0;
            if (r > 0) neighbours[count++] = idx - W;
            if (r + 1 < H) neighbours[count++] = idx + W;
            if (c > 0) neighbours[count++] = idx - 1;
            if (c + 1 < W) neighbours[count++] = idx + 1;
            for (int ch = 0; ch < 3; ++ch) {
                double sum = 0.0;
                for (int k = 0; k < count; ++k) sum += px[neighbours[k] * 3 + ch];
                const double updated = sum / count;
                max_change = std::max(max_change, std::abs(updated - px[idx * 3 + ch]));
                px[idx * 3 + ch] = updated;
            }
        }
        if (max_change < options.tolerance) break;
    }

    Image out = image;
    auto data = out.data();
    for (int idx : holes)
        for (int ch = 0; ch < 3; ++ch) data[idx * 3 + ch] = static_cast<float>(px[idx * 3 + ch]);
    return out;
}

}  // namespace tactile::sim
