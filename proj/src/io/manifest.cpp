#include "tactile/io/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "tactile/core/atomic_file.hpp"
#include "tactile/core/error.hpp"
#include "tactile/io/json_reader.hpp"
#include "tactile/io/png.hpp"

namespace tactile::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kImagesDir = "images";
constexpr const char* kReferencesDir = "references";

json domain_to_json(const DomainConfig& d) {
    return json{{"markers", d.markers},
                {"illumination_index", d.illumination_index},
                {"elastomer_index", d.elastomer_index}};
}

json render_to_json(const sim::RenderOptions& r) {
    return json{{"height", r.height},         {"width", r.width},
                {"surface_w_mm", r.surface_w_mm}, {"surface_h_mm", r.surface_h_mm},
                {"noise_sigma", r.noise_sigma}, {"noise", r.noise}};
}

sim::RenderOptions render_from_json(const json& doc, const std::string& where) {
    ObjectReader r(doc, where);
    sim::RenderOptions out;
    out.height = r.int_or("height", out.height);
    out.width = r.int_or("width", out.width);
    out.surface_w_mm = r.number_or("surface_w_mm", out.surface_w_mm);
    out.surface_h_mm = r.number_or("surface_h_mm", out.surface_h_mm);
    out.noise_sigma = r.number_or("noise_sigma", out.noise_sigma);
    out.noise = r.bool_or("noise", out.noise);
    r.finish();
    return out;
}

DomainConfig domain_from_reader(ObjectReader& r) {
    DomainConfig d;
    const auto markers = r.boolean("markers");
    const auto illum = r.integer("illumination_index");
    const auto elast = r.integer("elastomer_index");
    if (!markers) throw ConfigError(r.path_of("markers"), "missing");
    if (!illum) throw ConfigError(r.path_of("illumination_index"), "missing");
    if (!elast) throw ConfigError(r.path_of("elastomer_index"), "missing");
    if (*illum < 0 || *illum > 2) throw ConfigError(r.path_of("illumination_index"), "must be 0, 1 or 2");
    if (*elast < 0 || *elast > 2) throw ConfigError(r.path_of("elastomer_index"), "must be 0, 1 or 2");
    d.markers = *markers;
    d.illumination_index = static_cast<int>(*illum);
    d.elastomer_index = static_cast<int>(*elast);
    return d;
}

std::string relative(const std::string& dir, const std::string& name) { return dir + "/" + name; }

// Resolves a manifest-relative path and refuses anything outside the dataset.
fs::path resolve(const fs::path& root, const std::string& rel, const std::string& where) {
    const fs::path p(rel);
    if (rel.empty() || p.is_absolute()) throw ConfigError(where, "expected a relative path");
    for (const auto& part : p)
        if (part == "..") throw ConfigError(where, "path may not leave the dataset directory");
    return root / p;
}

}  // namespace

json path_spec_to_json(const sim::PathSpec& spec) {
    return json{{"grid_nx", spec.grid_nx},           {"grid_ny", spec.grid_ny},
                {"surface_w_mm", spec.surface_w_mm}, {"surface_h_mm", spec.surface_h_mm},
                {"depths_mm", spec.depths_mm},       {"radii_mm", spec.radii_mm},
                {"n_angles", spec.n_angles}};
}

sim::PathSpec path_spec_from_json(const json& doc, const std::string& where) {
    ObjectReader r(doc, where);
    sim::PathSpec spec;
    spec.grid_nx = r.int_or("grid_nx", spec.grid_nx);
    spec.grid_ny = r.int_or("grid_ny", spec.grid_ny);
    spec.surface_w_mm = r.number_or("surface_w_mm", spec.surface_w_mm);
    spec.surface_h_mm = r.number_or("surface_h_mm", spec.surface_h_mm);
    if (auto v = r.numbers("depths_mm")) spec.depths_mm = *v;
    if (auto v = r.numbers("radii_mm")) spec.radii_mm = *v;
    spec.n_angles = r.int_or("n_angles", spec.n_angles);
    r.finish();
    try {
        spec.validate();
    } catch (const InputError& e) {
        throw ConfigError(where, e.what());
    }
    return spec;
}

fs::path write_manifest(const sim::Dataset& dataset, const fs::path& dir, const WriteOptions& options) {
    const fs::path manifest = dir / kManifestName;
    if (!options.overwrite && fs::exists(manifest))
        throw IoError(manifest.string() + " already exists (use --force to overwrite)");
    fs::create_directories(dir / kImagesDir);
    fs::create_directories(dir / kReferencesDir);

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dataset.samples[a].id < dataset.samples[b].id;
    });
    for (std::size_t k = 1; k < order.size(); ++k)
        if (dataset.samples[order[k]].id == dataset.samples[order[k - 1]].id)
            throw InputError("duplicate sample id " + dataset.samples[order[k]].id);

    // Reference images are numbered in order of first use so rewrites agree.
    std::vector<std::pair<ImageHandle, std::string>> refs;
    std::ostringstream out;
    for (const std::size_t i : order) {
        const sim::TactileSample& s = dataset.samples[i];
        if (s.id.empty() || s.id.find('/') != std::string::npos || s.id.find('\\') != std::string::npos)
            throw InputError("invalid sample id '" + s.id + "'");
        if (!s.contact.valid() || !s.reference.valid())
            throw InputError("sample " + s.id + " is missing an image");

        const std::string contact_rel = relative(kImagesDir, s.id + ".png");
        write_png(dir / contact_rel, s.contact.get(), options.overwrite);

        std::string ref_rel;
        for (const auto& [handle, rel] : refs)
            if (handle.shares_with(s.reference)) {
                ref_rel = rel;
                break;
            }
        if (ref_rel.empty()) {
            char name[32];
            std::snprintf(name, sizeof name, "ref%05zu.png", refs.size());
            ref_rel = relative(kReferencesDir, name);
            write_png(dir / ref_rel, s.reference.get(), options.overwrite);
            refs.emplace_back(s.reference, ref_rel);
        }

        json rec = json::object();
        rec["format_version"] = kManifestFormatVersion;
        rec["id"] = s.id;
        rec["contact_image_path"] = contact_rel;
        rec["reference_image_path"] = ref_rel;
        if (s.force) {
            rec["fx"] = s.force->fx;
            rec["fy"] = s.force->fy;
            rec["fz"] = s.force->fz;
        }
        if (s.class_index) rec["class_index"] = *s.class_index;
        rec["markers"] = s.domain.markers;
        rec["illumination_index"] = s.domain.illumination_index;
        rec["elastomer_index"] = s.domain.elastomer_index;
        if (s.split) rec["split"] = sim::to_string(*s.split);
        rec["seed"] = s.seed;
        out << rec.dump() << '\n';
    }

    json sidecar{{"format_version", kManifestFormatVersion},
                 {"domain", domain_to_json(dataset.domain)},
                 {"path_spec", path_spec_to_json(dataset.spec)},
                 {"seed", dataset.seed},
                 {"render", render_to_json(dataset.render)},
                 {"samples", dataset.size()}};
    write_file_atomic(dir / kSidecarName, sidecar.dump(2) + "\n", options.overwrite);
    write_file_atomic(manifest, out.str(), options.overwrite);
    return manifest;
}

sim::Dataset read_manifest(const fs::path& path, const ReadOptions& options) {
    const fs::path manifest = fs::is_directory(path) ? path / kManifestName : path;
    const fs::path root = manifest.parent_path();
    if (!fs::exists(manifest)) throw IoError(manifest.string() + ": no such file");

    sim::Dataset dataset;
    const fs::path sidecar_path = root / kSidecarName;
    if (!fs::exists(sidecar_path)) throw IoError(sidecar_path.string() + ": no such file");
    {
        json doc;
        try {
            doc = json::parse(read_file(sidecar_path));
        } catch (const json::parse_error& e) {
            throw IoError(sidecar_path.string() + ": " + e.what());
        }
        try {
            ObjectReader r(doc, "$");
            const long long version = r.integer("format_version").value_or(-1);
            if (version != kManifestFormatVersion)
                throw ConfigError("$.format_version",
                                  "unsupported dataset format version " + std::to_string(version));
            const json* domain = r.member("domain");
            if (!domain) throw ConfigError("$.domain", "missing");
            ObjectReader dr(*domain, "$.domain");
            dataset.domain = domain_from_reader(dr);
            dr.finish();
            const json* spec = r.member("path_spec");
            if (!spec) throw ConfigError("$.path_spec", "missing");
            dataset.spec = path_spec_from_json(*spec, "$.path_spec");
            dataset.seed = r.u64_or("seed", 0);
            if (const json* render = r.member("render")) dataset.render = render_from_json(*render, "$.render");
            r.u64_or("samples", 0);
            r.finish();
        } catch (const ConfigError& e) {
            throw IoError(sidecar_path.string() + ": " + e.what());
        }
    }

    std::ifstream in(manifest);
    if (!in) throw IoError(manifest.string() + ": cannot open");
    const ImageHandle::Loader loader = [](const fs::path& p) { return read_png(p); };
    std::map<std::string, ImageHandle> references;
    ReadStats stats;
    const int num_classes = dataset.num_classes();

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::string where = manifest.string() + ":" + std::to_string(line_no);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IoError(where + ": malformed JSON: " + e.what());
        }
        if (rec.is_object() && rec.contains("id") && rec["id"].is_string())
            where += " (id " + rec["id"].get<std::string>() + ")";
        try {
            ObjectReader r(rec, "$");
            const long long version = r.integer("format_version").value_or(-1);
            if (version != kManifestFormatVersion)
                throw ConfigError("$.format_version", "unsupported record format version " + std::to_string(version));
            sim::TactileSample s;
            const auto id = r.string("id");
            if (!id || id->empty()) throw ConfigError("$.id", "missing");
            s.id = *id;
            const auto contact = r.string("contact_image_path");
            if (!contact) throw ConfigError("$.contact_image_path", "missing");
            const auto reference = r.string("reference_image_path");
            if (!reference) throw ConfigError("$.reference_image_path", "missing");
            s.contact = ImageHandle(resolve(root, *contact, "$.contact_image_path"), loader);
            auto [it, inserted] = references.try_emplace(*reference);
            if (inserted) it->second = ImageHandle(resolve(root, *reference, "$.reference_image_path"), loader);
            s.reference = it->second;
            s.domain = domain_from_reader(r);
            if (const auto split = r.string("split")) {
                try {
                    s.split = sim::split_from_string(*split);
                } catch (const InputError& e) {
                    throw ConfigError("$.split", e.what());
                }
            }
            s.seed = r.u64_or("seed", 0);

            static const char* const kLabelKeys[] = {"fx", "fy", "fz", "class_index"};
            bool any_label = false;
            for (const char* key : kLabelKeys) any_label = any_label || (rec.contains(key) && !rec[key].is_null());
            if (any_label) ++stats.records_with_labels;
            if (options.labels == LabelPolicy::Ignore || !any_label) {
                for (const char* key : kLabelKeys) r.member(key);
            } else {
                ++stats.label_reads;
                const auto fx = r.number("fx");
                const auto fy = r.number("fy");
                const auto fz = r.number("fz");
                if (!fx || !fy || !fz)
                    throw ConfigError(!fx ? "$.fx" : !fy ? "$.fy" : "$.fz",
                                      "force labels must give all of fx, fy and fz or none");
                const auto cls = r.integer("class_index");
                if (!cls) throw ConfigError("$.class_index", "labeled records need a class index");
                if (*cls < 0 || *cls >= num_classes)
                    throw ConfigError("$.class_index", "out of range [0, " + std::to_string(num_classes) + ")");
                s.force = ForceLabel{*fx, *fy, *fz};
                s.class_index = static_cast<int>(*cls);
            }
            r.finish();
            dataset.samples.push_back(std::move(s));
            ++stats.records;
        } catch (const ConfigError& e) {
            throw IoError(where + ": " + e.what());
        }
    }

    std::vector<std::string> ids;
    ids.reserve(dataset.size());
    for (const auto& s : dataset.samples) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    if (const auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end())
        throw IoError(manifest.string() + ": duplicate sample id " + *dup);

    if (options.stats) *options.stats = stats;
    return dataset;
}

}  // namespace tactile::io
