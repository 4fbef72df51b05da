#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tactile/eval/report.hpp"

namespace tactile::eval {

/// Methods x groups table of avg MAE with a trailing Avg column.
struct ComparisonTable {
    struct Row {
        std::string method;
        std::vector<double> values;  // one per group
        double average = 0.0;
    };
    std::vector<std::string> groups;
    std::vector<Row> rows;
};

/// Groups keep their first-seen order. Rows follow source-only, mmd, coral,
/// lmmd, then any other method in first-seen order. Every method must cover
/// every group exactly once and all reports must share the axis ranges.
ComparisonTable compare_reports(const std::vector<GroupReport>& reports);

/// Aligned plain text, three decimals.
std::string render_text(const ComparisonTable& table);
nlohmann::json to_json(const ComparisonTable& table);

}  // namespace tactile::eval
