#include "tactile/eval/report.hpp"

#include <cmath>
#include <limits>

#include "tactile/core/error.hpp"
#include "tactile/eval/metrics.hpp"
#include "tactile/train/normalization.hpp"

namespace tactile::eval {

namespace {

using nlohmann::json;

void require(const json& doc, const std::string& path, const char* key, json::value_t type) {
    if (!doc.contains(key)) throw ConfigError(path + "." + key, "missing field");
    const json& v = doc.at(key);
    const bool ok = type == json::value_t::number_float ? v.is_number()
                    : type == json::value_t::number_unsigned ? v.is_number_integer() && v.get<long long>() >= 0
                                                             : v.type() == type;
    if (!ok) throw ConfigError(path + "." + key, std::string("expected ") + json(type).type_name());
}

}  // namespace

GroupReport report_from_predictions(const model::Matrix& pred, const model::Matrix& truth,
                                    const NormalizationSpec& range, const ReportOptions& options) {
    GroupReport r;
    r.method = options.method;
    r.group = options.group;
    r.samples = static_cast<std::size_t>(truth.rows());
    r.range = range;
    const auto mae = mae_per_axis(pred, truth);
    for (int a = 0; a < 3; ++a) {
        const Eigen::VectorXd p = pred.col(a);
        const Eigen::VectorXd t = truth.col(a);
        std::vector<std::string> warnings;
        r.axes[a].mae = mae[a];
        r.axes[a].r2 = r_squared({p.data(), static_cast<std::size_t>(p.size())},
                                 {t.data(), static_cast<std::size_t>(t.size())}, &warnings);
        for (const auto& w : warnings) r.warnings.push_back(std::string(kAxisNames[a]) + ": " + w);
        r.axes[a].pct_range = pct_of_range(mae[a], a, range);
    }
    r.avg_mae = (mae[0] + mae[1] + mae[2]) / 3.0;
    r.metadata["avg_mae_convention"] = kAverageConvention;
    return r;
}

GroupReport build_group_report(const train::TrainedModel& model, const sim::Dataset& test,
                               const ReportOptions& options) {
    if (test.empty()) throw InputError("test split is empty");
    for (const auto& s : test.samples)
        if (!s.force) throw InputError("evaluation requires labeled test data; sample " + s.id + " has no force label");
    const model::Matrix truth = train::force_matrix(test);
    const model::Matrix pred = train::predict_forces(model, test);

    ReportOptions opts = options;
    const std::string source = model.metadata.value("source_domain", std::string("unknown"));
    if (opts.group.empty()) opts.group = source + " -> " + test.domain.label();
    GroupReport r = report_from_predictions(pred, truth, model.normalization, opts);
    r.source_domain = source;
    r.target_domain = test.domain.label();
    r.metadata["model"] = model.metadata;
    return r;
}

json to_json(const GroupReport& r) {
    json axes = json::array();
    for (int a = 0; a < 3; ++a) {
        const auto& m = r.axes[a];
        axes.push_back({{"axis", kAxisNames[a]},
                        {"mae", m.mae},
                        {"r2", std::isnan(m.r2) ? json(nullptr) : json(m.r2)},
                        {"pct_range", m.pct_range}});
    }
    return {{"format_version", kReportFormatVersion},
            {"method", r.method},
            {"group", r.group},
            {"source_domain", r.source_domain},
            {"target_domain", r.target_domain},
            {"samples", r.samples},
            {"axes", axes},
            {"avg_mae", r.avg_mae},
            {"range", {{"min", r.range.min}, {"max", r.range.max}}},
            {"warnings", r.warnings},
            {"metadata", r.metadata}};
}

void validate_report_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("$", "report must be a JSON object");
    require(doc, "$", "format_version", json::value_t::number_unsigned);
    if (doc.at("format_version").get<int>() != kReportFormatVersion)
        throw ConfigError("$.format_version", "unsupported report version");
    for (const char* key : {"method", "group", "source_domain", "target_domain"})
        require(doc, "$", key, json::value_t::string);
    require(doc, "$", "samples", json::value_t::number_unsigned);
    require(doc, "$", "avg_mae", json::value_t::number_float);
    require(doc, "$", "axes", json::value_t::array);
    require(doc, "$", "range", json::value_t::object);
    require(doc, "$", "warnings", json::value_t::array);
    require(doc, "$", "metadata", json::value_t::object);
    const json& axes = doc.at("axes");
    if (axes.size() != 3) throw ConfigError("$.axes", "expected 3 entries");
    for (std::size_t a = 0; a < 3; ++a) {
        const std::string path = "$.axes[" + std::to_string(a) + "]";
        const json& ax = axes[a];
        if (!ax.is_object()) throw ConfigError(path, "expected object");
        require(ax, path, "axis", json::value_t::string);
        if (ax.at("axis") != kAxisNames[a]) throw ConfigError(path + ".axis", "expected " + std::string(kAxisNames[a]));
        require(ax, path, "mae", json::value_t::number_float);
        require(ax, path, "pct_range", json::value_t::number_float);
        if (!ax.contains("r2") || !(ax.at("r2").is_number() || ax.at("r2").is_null()))
            throw ConfigError(path + ".r2", "expected number or null");
        if (ax.at("mae").get<double>() < 0) throw ConfigError(path + ".mae", "must be >= 0");
    }
    const json& range = doc.at("range");
    for (const char* key : {"min", "max"}) {
        const std::string path = std::string("$.range.") + key;
        if (!range.contains(key) || !range.at(key).is_array() || range.at(key).size() != 3)
            throw ConfigError(path, "expected an array of 3 numbers");
        for (const auto& v : range.at(key))
            if (!v.is_number()) throw ConfigError(path, "expected an array of 3 numbers");
    }
}

GroupReport report_from_json(const json& doc) {
    validate_report_json(doc);
    GroupReport r;
    r.method = doc.at("method");
    r.group = doc.at("group");
    r.source_domain = doc.at("source_domain");
    r.target_domain = doc.at("target_domain");
    r.samples = doc.at("samples");
    r.avg_mae = doc.at("avg_mae");
    for (int a = 0; a < 3; ++a) {
        const json& ax = doc.at("axes")[static_cast<std::size_t>(a)];
        r.axes[a].mae = ax.at("mae");
        r.axes[a].r2 = ax.at("r2").is_null() ? std::numeric_limits<double>::quiet_NaN() : ax.at("r2").get<double>();
        r.axes[a].pct_range = ax.at("pct_range");
    }
    r.range.min = doc.at("range").at("min");
    r.range.max = doc.at("range").at("max");
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    r.metadata = doc.at("metadata");
    return r;
}

}  // namespace tactile::eval
