#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tactile/core/image_handle.hpp"
#include "tactile/core/types.hpp"
#include "tactile/sim/path.hpp"
#include "tactile/sim/renderer.hpp"

namespace tactile::sim {

enum class Split { Train, Valid, Test };

std::string to_string(Split split);
Split split_from_string(const std::string& text);

struct TactileSample {
    std::string id;
    ImageHandle contact;
    ImageHandle reference;
    std::optional<ForceLabel> force;
    std::optional<int> class_index;
    DomainConfig domain;
    std::optional<Split> split;
    std::uint64_t seed = 0;

    bool labeled() const { return force.has_value(); }
    /// Length-`num_classes` indicator; throws InputError when unlabeled or
    /// the class index is out of range.
    std::vector<double> class_onehot(int num_classes) const;
};

struct Dataset {
    DomainConfig domain;
    PathSpec spec;
    std::uint64_t seed = 0;
    RenderOptions render;
    std::vector<TactileSample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    int num_classes() const { return spec.points_per_surface(); }
    /// True iff every sample carries force and class labels.
    bool labeled() const;
    /// Subset in the given index order; images are shared, not copied.
    Dataset subset(const std::vector<std::size_t>& indices) const;
};

enum class MarkerRemoval {
    None,     // render the domain as configured
    Inpaint,  // render with markers, then inpaint them using the renderer's mask
};

struct GenerateOptions {
    RenderOptions render{};
    bool labeled = true;
    MarkerRemoval marker_removal = MarkerRemoval::None;
};

/// One sample per point of `generate_contact_path(spec)`; the reference
/// image is rendered once per surface point and shared. With
/// MarkerRemoval::Inpaint the resulting domain has `markers == false` while
/// the images derive from the marker render of the same seed.
Dataset generate_dataset(const DomainConfig& domain, const PathSpec& spec, std::uint64_t seed,
                         const GenerateOptions& options = {});

/// Removes markers from every contact and reference image by darkness
/// detection + inpainting; labels are kept and `markers` is cleared.
Dataset inpaint_dataset(const Dataset& dataset);

/// Sample id for position `index`, e.g. "s000042".
std::string sample_id(std::size_t index);

}  // namespace tactile::sim
