#include "tactile/sim/dataset.hpp"

#include <cstdio>
#include <map>

#include "tactile/core/error.hpp"
#include "tactile/sim/contact_model.hpp"
#include "tactile/sim/inpaint.hpp"

namespace tactile::sim {

namespace {

// Reference renders draw their noise from a stream range disjoint from samples.
constexpr std::uint64_t kReferenceStreamBase = 1ULL << 40;

}  // namespace

std::string to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Valid: return "valid";
        case Split::Test: return "test";
    }
    return "train";
}

Split split_from_string(const std::string& text) {
    if (text == "train") return Split::Train;
    if (text == "valid") return Split::Valid;
    if (text == "test") return Split::Test;
    throw InputError("unknown split tag '" + text + "'");
}

std::vector<double> TactileSample::class_onehot(int num_classes) const {
    if (!class_index) throw InputError("sample " + id + " has no contact class");
    if (*class_index < 0 || *class_index >= num_classes)
        throw InputError("sample " + id + " class index out of range");
    std::vector<double> onehot(static_cast<std::size_t>(num_classes), 0.0);
    onehot[static_cast<std::size_t>(*class_index)] = 1.0;
    return onehot;
}

bool Dataset::labeled() const {
    if (samples.empty()) return false;
    for (const auto& s : samples)
        if (!s.force || !s.class_index) return false;
    return true;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.domain = domain;
    out.spec = spec;
    out.seed = seed;
    out.render = render;
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= samples.size()) throw InputError("subset index out of range");
        out.samples.push_back(samples[i]);
    }
    return out;
}

std::string sample_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06zu", index);
    return buf;
}

Dataset generate_dataset(const DomainConfig& domain, const PathSpec& spec, std::uint64_t seed,
                         const GenerateOptions& options) {
    domain.validate();
    const auto path = generate_contact_path(spec);
    const bool inpaint = options.marker_removal == MarkerRemoval::Inpaint;

    DomainConfig render_domain = domain;
    DomainConfig stored_domain = domain;
    if (inpaint) {
        render_domain.markers = true;
        stored_domain.markers = false;
    }

    auto render = [&](const ContactPoint& point, std::uint64_t stream) {
        auto rendered = render_with_mask(point, render_domain, seed, stream, options.render);
        if (inpaint) return inpaint_markers(rendered.image, rendered.marker_mask);
        return std::move(rendered.image);
    };

    Dataset ds;
    ds.domain = stored_domain;
    ds.spec = spec;
    ds.seed = seed;
    ds.render = options.render;
    ds.samples.reserve(path.size());

    std::map<int, ImageHandle> references;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const ContactPoint& point = path[i];
        auto ref = references.find(point.surface_index);
        if (ref == references.end()) {
            ContactPoint origin = point;
            origin.depth = 0.0;
            origin.lateral = {0.0, 0.0};
            origin.class_index = 0;
            ref = references
                      .emplace(point.surface_index,
                               ImageHandle(render(origin, kReferenceStreamBase + point.surface_index)))
                      .first;
        }

        TactileSample sample;
        sample.id = sample_id(i);
        sample.contact = ImageHandle(render(point, i));
        sample.reference = ref->second;
        sample.domain = stored_domain;
        sample.seed = seed;
        if (options.labeled) {
            const double fz = hertz_normal_force(point.depth, domain.elastomer_index);
            const auto shear =
                shear_force(point.lateral, point.depth, domain.elastomer_index, spec.max_radius());
            sample.force = ForceLabel{shear[0], shear[1], fz};
            sample.class_index = point.class_index;
        }
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

Dataset inpaint_dataset(const Dataset& dataset) {
    Dataset out = dataset;
    out.domain.markers = false;
    // References are shared between samples; inpaint each distinct one once.
    std::vector<std::pair<ImageHandle, ImageHandle>> done;
    auto fill = [](const ImageHandle& handle) {
        const Image& img = handle.get();
        return ImageHandle(inpaint_markers(img, detect_marker_mask(img)));
    };
    for (auto& sample : out.samples) {
        sample.domain.markers = false;
        sample.contact = fill(sample.contact);
        ImageHandle replacement;
        for (const auto& [from, to] : done)
            if (from.shares_with(sample.reference)) replacement = to;
        if (!replacement.valid()) {
            replacement = fill(sample.reference);
            done.emplace_back(sample.reference, replacement);
        }
        sample.reference = replacement;
    }
    return out;
}

}  // namespace tactile::sim
