#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "tactile/core/types.hpp"
#include "tactile/sim/dataset.hpp"
#include "tactile/train/trainer.hpp"

namespace tactile::eval {

inline constexpr int kReportFormatVersion = 1;
inline constexpr const char* kAverageConvention = "unweighted mean of the fx, fy and fz MAEs";

struct AxisMetrics {
    double mae = 0.0;        // newtons
    double r2 = 0.0;         // NaN when undefined
    double pct_range = 0.0;  // percent of the source range, full precision
};

/// Metrics of one model on one target test split.
struct GroupReport {
    std::string method;  // e.g. "source-only", "lmmd"
    std::string group;   // "<source> -> <target>"
    std::string source_domain;
    std::string target_domain;
    std::size_t samples = 0;
    std::array<AxisMetrics, 3> axes{};
    double avg_mae = 0.0;
    NormalizationSpec range;
    std::vector<std::string> warnings;
    nlohmann::json metadata = nlohmann::json::object();
};

struct ReportOptions {
    std::string method = "lmmd";
    /// Defaults to "<source_domain> -> <target label>".
    std::string group;
};

/// Evaluates `model` on a labeled test split. Forces are denormalised with
/// the model's own range; labels are read here and nowhere else.
GroupReport build_group_report(const train::TrainedModel& model, const sim::Dataset& test,
                               const ReportOptions& options = {});

/// Report from predictions already in newtons.
GroupReport report_from_predictions(const model::Matrix& pred, const model::Matrix& truth,
                                    const NormalizationSpec& range, const ReportOptions& options);

nlohmann::json to_json(const GroupReport& report);
/// Throws ConfigError naming the offending JSON path.
void validate_report_json(const nlohmann::json& doc);
GroupReport report_from_json(const nlohmann::json& doc);

}  // namespace tactile::eval
