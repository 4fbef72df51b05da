#include "tactile/cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "tactile/core/atomic_file.hpp"
#include "tactile/core/error.hpp"
#include "tactile/eval/compare.hpp"
#include "tactile/eval/embeddings.hpp"
#include "tactile/eval/report.hpp"
#include "tactile/io/config.hpp"
#include "tactile/io/manifest.hpp"
#include "tactile/io/model_file.hpp"
#include "tactile/io/trace.hpp"
#include "tactile/train/split.hpp"
#include "tactile/train/trainer.hpp"

namespace tactile::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GenArgs {
    bool markers = false;
    bool inpaint = false;
    int illum = 0;
    int elastomer = 0;
    std::string path = "full";
    std::vector<int> grid;
    std::string out;
    std::uint64_t seed = 0;
    bool unlabeled = false;
    bool split = false;
    std::optional<std::uint64_t> split_seed;
    bool force = false;
};

struct InpaintArgs {
    std::string in, out;
    bool force = false;
};

struct TrainArgs {
    std::string source, target, init, config, out, trace;
    std::optional<std::uint64_t> seed;
    bool force = false;
};

struct EvalArgs {
    std::string model, target, report, method, group;
    bool force = false;
};

struct CompareArgs {
    std::vector<std::string> reports;
    std::string format = "text";
    std::string out;
    bool force = false;
};

struct EmbedArgs {
    std::string model, source, target, out;
    bool force = false;
};

bool has_split_tags(const sim::Dataset& ds) {
    return std::any_of(ds.samples.begin(), ds.samples.end(), [](const auto& s) { return s.split.has_value(); });
}

// Records tagged with `split`, or every record when the manifest is untagged.
sim::Dataset select_split(const sim::Dataset& ds, sim::Split split, std::ostream& err) {
    if (!has_split_tags(ds)) {
        err << "note: manifest has no split tags; using all " << ds.size() << " records\n";
        return ds;
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.samples[i].split == split) keep.push_back(i);
    if (keep.empty()) throw InputError("manifest has no records in the " + sim::to_string(split) + " split");
    err << "using " << keep.size() << " " << sim::to_string(split) << " records of " << ds.size() << "\n";
    return ds.subset(keep);
}

io::RunConfig load_config(const std::string& path) {
    return path.empty() ? io::parse_config(json::object()) : io::parse_config_file(path);
}

void echo_config(const json& resolved, std::ostream& out) { out << "resolved config:\n" << resolved.dump(2) << "\n"; }

int image_size_of(const sim::Dataset& ds) {
    if (ds.empty()) throw InputError("dataset is empty");
    const Image& img = ds.samples.front().contact.get();
    if (img.height() != img.width()) throw InputError("images must be square");
    return img.height();
}

fs::path trace_path(const TrainArgs& a) { return a.trace.empty() ? fs::path(a.out + ".trace.jsonl") : fs::path(a.trace); }

// Outputs are checked before any work so a long run never ends in a refusal.
void ensure_writable(const fs::path& path, bool force) {
    if (!force && fs::exists(path)) throw IoError(path.string() + " already exists (use --force to overwrite)");
}

train::EpochCallback progress(std::ostream& err, const char* stage) {
    return [&err, stage](const train::EpochTrace& e) {
        err << stage << " epoch " << e.epoch << " iter " << e.iteration << " L_r " << e.regression << " L_c "
            << e.classification << " L_t " << e.transfer << " eta " << e.eta << "\n";
    };
}

int cmd_gen(const GenArgs& a, std::ostream& out, std::ostream& err) {
    const fs::path dir(a.out);
    ensure_writable(dir / io::kManifestName, a.force);
    DomainConfig domain{a.markers || a.inpaint, a.illum, a.elastomer};
    sim::PathSpec spec = a.path == "sparse" ? sim::sparse_path() : sim::full_path();
    if (!a.grid.empty()) {
        spec.grid_nx = a.grid[0];
        spec.grid_ny = a.grid[1];
    }
    spec.validate();
    sim::GenerateOptions opts;
    opts.labeled = !a.unlabeled;
    opts.marker_removal = a.inpaint ? sim::MarkerRemoval::Inpaint : sim::MarkerRemoval::None;
    sim::Dataset ds = sim::generate_dataset(domain, spec, a.seed, opts);
    if (a.split) {
        const auto parts = train::split_target(ds, {}, a.split_seed.value_or(a.seed));
        sim::Dataset tagged = ds;
        tagged.samples.clear();
        for (const auto* part : {&parts.train, &parts.valid, &parts.test})
            tagged.samples.insert(tagged.samples.end(), part->samples.begin(), part->samples.end());
        ds = std::move(tagged);
        err << "split: " << parts.train.size() << " train, " << parts.valid.size() << " valid, "
            << parts.test.size() << " test\n";
    }
    const fs::path manifest = io::write_manifest(ds, dir, {a.force});
    out << "wrote " << ds.size() << " records (" << ds.domain.label() << ", " << (opts.labeled ? "labeled" : "unlabeled")
        << ") to " << manifest.string() << "\n";
    return kExitOk;
}

int cmd_inpaint(const InpaintArgs& a, std::ostream& out, std::ostream&) {
    ensure_writable(fs::path(a.out) / io::kManifestName, a.force);
    const sim::Dataset in = io::read_manifest(a.in);
    if (!in.domain.markers) throw InputError("dataset " + a.in + " has no markers to remove");
    const sim::Dataset ds = sim::inpaint_dataset(in);
    const fs::path manifest = io::write_manifest(ds, a.out, {a.force});
    out << "wrote " << ds.size() << " inpainted records (" << ds.domain.label() << ") to " << manifest.string() << "\n";
    return kExitOk;
}

int cmd_pretrain(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    ensure_writable(a.out, a.force);
    ensure_writable(trace_path(a), a.force);
    io::RunConfig config = load_config(a.config);
    if (a.seed) config.train.seed = *a.seed;
    // Source-only training always runs with regression loss alone.
    config.train.loss_weights = {1.0, 0.0, 0.0};
    const json resolved = io::to_json(config);
    echo_config(resolved, out);

    const sim::Dataset source = io::read_manifest(a.source);
    if (!source.labeled()) throw InputError("pretraining requires a labeled source dataset");
    const auto arch = io::model_config(config.model, image_size_of(source), source.num_classes());
    train::TrainResult r = train::pretrain_source(source, arch, config.train, progress(err, "pretrain"));
    r.model.metadata["config"] = resolved;
    io::save_model(a.out, r.model, a.force);
    write_file_atomic(trace_path(a), io::trace_to_jsonl(r.trace), a.force);
    out << "wrote model " << a.out << " and trace " << trace_path(a).string() << "\n";
    return kExitOk;
}

int cmd_adapt(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    ensure_writable(a.out, a.force);
    ensure_writable(trace_path(a), a.force);
    io::RunConfig config = load_config(a.config);
    if (a.seed) config.adapt.seed = *a.seed;
    const json resolved = io::to_json(config);
    echo_config(resolved, out);

    const sim::Dataset source = io::read_manifest(a.source);
    if (!source.labeled()) throw InputError("adaptation requires a labeled source dataset");
    io::ReadStats stats;
    const sim::Dataset target_all = io::read_manifest(a.target, {io::LabelPolicy::Ignore, &stats});
    if (stats.records_with_labels > 0)
        err << "target labels ignored: " << stats.records_with_labels << " of " << stats.records
            << " records carry labels that were not read\n";
    const sim::Dataset target = select_split(target_all, sim::Split::Train, err);
    const train::TrainedModel init = io::load_model(a.init);
    train::TrainResult r = train::adapt(source, target, init, config.adapt, progress(err, "adapt"));
    r.model.metadata["config"] = resolved;
    io::save_model(a.out, r.model, a.force);
    write_file_atomic(trace_path(a), io::trace_to_jsonl(r.trace), a.force);
    out << "wrote model " << a.out << " and trace " << trace_path(a).string() << "\n";
    return kExitOk;
}

std::string default_method(const json& metadata) {
    if (metadata.value("stage", std::string()) == "adapt") return metadata.value("transfer", std::string("lmmd"));
    return "source-only";
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    if (!a.report.empty()) ensure_writable(a.report, a.force);
    const train::TrainedModel model = io::load_model(a.model);
    const sim::Dataset target = io::read_manifest(a.target);
    const sim::Dataset test = select_split(target, sim::Split::Test, err);
    for (const auto& s : test.samples)
        if (!s.labeled())
            throw InputError("evaluation requires labeled test data; " + a.target + " record " + s.id +
                             " has no force label");
    eval::ReportOptions opts;
    opts.method = a.method.empty() ? default_method(model.metadata) : a.method;
    opts.group = a.group;
    const eval::GroupReport report = eval::build_group_report(model, test, opts);
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    const json doc = eval::to_json(report);
    if (!a.report.empty()) write_file_atomic(a.report, doc.dump(2) + "\n", a.force);
    out << report.method << " " << report.group << " (" << report.samples << " samples): MAE fx "
        << report.axes[0].mae << " fy " << report.axes[1].mae << " fz " << report.axes[2].mae << " avg "
        << report.avg_mae << " N\n";
    return kExitOk;
}

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream&) {
    if (!a.out.empty()) ensure_writable(a.out, a.force);
    std::vector<eval::GroupReport> reports;
    for (const auto& path : a.reports) {
        json doc;
        try {
            doc = json::parse(read_file(path));
        } catch (const json::parse_error& e) {
            throw IoError(path + ": invalid JSON: " + e.what());
        }
        try {
            reports.push_back(eval::report_from_json(doc));
        } catch (const ConfigError& e) {
            throw IoError(path + ": " + e.what());
        }
    }
    const eval::ComparisonTable table = eval::compare_reports(reports);
    const std::string text = a.format == "json" ? eval::to_json(table).dump(2) + "\n" : eval::render_text(table);
    if (a.out.empty())
        out << text;
    else
        write_file_atomic(a.out, text, a.force);
    return kExitOk;
}

int cmd_embed(const EmbedArgs& a, std::ostream& out, std::ostream&) {
    ensure_writable(a.out, a.force);
    const train::TrainedModel model = io::load_model(a.model);
    const sim::Dataset source = io::read_manifest(a.source);
    const sim::Dataset target = io::read_manifest(a.target);
    const eval::Embeddings e = eval::compute_embeddings(model.params, source, target);
    eval::export_embeddings(e, a.out, a.force);
    const auto ns = static_cast<Eigen::Index>(source.size());
    const double dist = eval::centroid_distance(e.features.topRows(ns), e.features.bottomRows(e.features.rows() - ns));
    out << "wrote " << e.features.rows() << " embeddings to " << a.out << "; source-target centroid distance " << dist
        << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic tactile force calibration with unsupervised domain adaptation", "tactile"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Render a tactile dataset for one sensor domain");
    g->add_flag("--markers", gen.markers, "Render marker dots");
    g->add_flag("--inpaint", gen.inpaint, "Render with markers, then inpaint them away");
    g->add_option("--illum", gen.illum, "Illumination index")->check(CLI::Range(0, 2));
    g->add_option("--elastomer", gen.elastomer, "Elastomer index")->check(CLI::Range(0, 2));
    g->add_option("--path", gen.path, "Indentation path preset")->check(CLI::IsMember({"full", "sparse"}));
    g->add_option("--grid", gen.grid, "Surface grid override: NX NY")->expected(2)->check(CLI::PositiveNumber);
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--seed", gen.seed, "Render seed");
    g->add_flag("--unlabeled", gen.unlabeled, "Omit force and class labels");
    g->add_flag("--split", gen.split, "Tag records train/valid/test (0.6/0.2/0.2)");
    g->add_option("--split-seed", gen.split_seed, "Seed of the split shuffle (default: --seed)");
    g->add_flag("--force", gen.force, "Overwrite existing outputs");

    InpaintArgs inp;
    auto* ip = app.add_subcommand("inpaint", "Remove markers from a dataset");
    ip->add_option("--in", inp.in, "Input dataset")->required();
    ip->add_option("--out", inp.out, "Output directory")->required();
    ip->add_flag("--force", inp.force, "Overwrite existing outputs");

    TrainArgs pre;
    auto* pt = app.add_subcommand("pretrain", "Source-only training");
    pt->add_option("--source", pre.source, "Labeled source dataset")->required();
    pt->add_option("--config", pre.config, "Run config (JSON)");
    pt->add_option("--out", pre.out, "Model file")->required();
    pt->add_option("--trace", pre.trace, "Trace file (default: <out>.trace.jsonl)");
    pt->add_option("--seed", pre.seed, "Override train.seed");
    pt->add_flag("--force", pre.force, "Overwrite existing outputs");

    TrainArgs ad;
    auto* at = app.add_subcommand("adapt", "Unsupervised adaptation to a target domain");
    at->add_option("--source", ad.source, "Labeled source dataset")->required();
    at->add_option("--target", ad.target, "Target dataset; labels are never read")->required();
    at->add_option("--init", ad.init, "Pretrained model file")->required();
    at->add_option("--config", ad.config, "Run config (JSON)");
    at->add_option("--out", ad.out, "Model file")->required();
    at->add_option("--trace", ad.trace, "Trace file (default: <out>.trace.jsonl)");
    at->add_option("--seed", ad.seed, "Override adapt.seed");
    at->add_flag("--force", ad.force, "Overwrite existing outputs");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Force errors on a labeled target test split");
    e->add_option("--model", ev.model, "Model file")->required();
    e->add_option("--target", ev.target, "Labeled target dataset")->required();
    e->add_option("--report", ev.report, "Report file (JSON)");
    e->add_option("--method", ev.method, "Method name (default from the model)");
    e->add_option("--group", ev.group, "Group name (default \"<source> -> <target>\")");
    e->add_flag("--force", ev.force, "Overwrite existing outputs");

    CompareArgs cmp;
    auto* c = app.add_subcommand("compare", "Tabulate reports by method and group");
    c->add_option("--reports", cmp.reports, "Report files")->required()->expected(1, -1);
    c->add_option("--format", cmp.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    c->add_option("--out", cmp.out, "Write to a file instead of stdout");
    c->add_flag("--force", cmp.force, "Overwrite existing outputs");

    EmbedArgs emb;
    auto* em = app.add_subcommand("embed", "Export bottleneck features with a PCA projection");
    em->add_option("--model", emb.model, "Model file")->required();
    em->add_option("--source", emb.source, "Source dataset")->required();
    em->add_option("--target", emb.target, "Target dataset")->required();
    em->add_option("--out", emb.out, "CSV file")->required();
    em->add_flag("--force", emb.force, "Overwrite existing outputs");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (g->parsed()) return cmd_gen(gen, out, err);
        if (ip->parsed()) return cmd_inpaint(inp, out, err);
        if (pt->parsed()) return cmd_pretrain(pre, out, err);
        if (at->parsed()) return cmd_adapt(ad, out, err);
        if (e->parsed()) return cmd_eval(ev, out, err);
        if (c->parsed()) return cmd_compare(cmp, out, err);
        if (em->parsed()) return cmd_embed(emb, out, err);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace tactile::cli
