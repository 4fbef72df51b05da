#pragma once

#include <filesystem>
#include <functional>
#include <memory>

#include "tactile/core/image.hpp"

namespace tactile {

/// Shared, immutable image that is either resident or loaded on first use.
class ImageHandle {
public:
    using Loader = std::function<Image(const std::filesystem::path&)>;

    ImageHandle() = default;
    explicit ImageHandle(Image image)
        : state_(std::make_shared<State>(State{std::make_shared<const Image>(std::move(image)), {}, {}})) {}
    ImageHandle(std::filesystem::path path, Loader loader)
        : state_(std::make_shared<State>(State{nullptr, std::move(path), std::move(loader)})) {}

    bool valid() const noexcept { return state_ != nullptr; }
    bool resident() const noexcept { return state_ && state_->image; }
    const std::filesystem::path& path() const { return state_->path; }

    /// Loads on first call; later calls return the cached image.
    const Image& get() const {
        if (!state_->image) state_->image = std::make_shared<const Image>(state_->loader(state_->path));
        return *state_->image;
    }

    /// Drops a cached image that can be reloaded from disk.
    void release() const {
        if (state_ && state_->loader) state_->image.reset();
    }

    /// Two handles refer to the same underlying image object.
    bool shares_with(const ImageHandle& other) const noexcept { return state_ == other.state_; }

private:
    struct State {
        std::shared_ptr<const Image> image;
        std::filesystem::path path;
        Loader loader;
    };
    std::shared_ptr<State> state_;
};

}  // namespace tactile
