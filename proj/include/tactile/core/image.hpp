#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tactile {

/// Interleaved RGB image (row-major, HWC) with intensities nominally in [0,1].
class Image {
public:
    static constexpr int kChannels = 3;

    Image() = default;
    Image(int height, int width, float fill = 0.0f)
        : height_(height), width_(width),
          data_(static_cast<std::size_t>(height) * width * kChannels, fill) {}

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float& at(int row, int col, int channel) {
        return data_[(static_cast<std::size_t>(row) * width_ + col) * kChannels + channel];
    }
    float at(int row, int col, int channel) const {
        return data_[(static_cast<std::size_t>(row) * width_ + col) * kChannels + channel];
    }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

/// Single-channel pixel mask, nonzero = masked.
struct PixelMask {
    int height = 0;
    int width = 0;
    std::vector<unsigned char> bits;

    PixelMask() = default;
    PixelMask(int h, int w) : height(h), width(w), bits(static_cast<std::size_t>(h) * w, 0) {}

    bool operator()(int row, int col) const {
        return bits[static_cast<std::size_t>(row) * width + col] != 0;
    }
    void set(int row, int col, bool on = true) {
        bits[static_cast<std::size_t>(row) * width + col] = on ? 1 : 0;
    }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : bits) n += b != 0;
        return n;
    }
};

}  // namespace tactile
