#include "tactile/eval/compare.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "tactile/core/error.hpp"

namespace tactile::eval {

namespace {

int method_rank(const std::string& method) {
    static const std::vector<std::string> order{"source-only", "mmd", "coral", "lmmd"};
    const auto it = std::find(order.begin(), order.end(), method);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

ComparisonTable compare_reports(const std::vector<GroupReport>& reports) {
    if (reports.empty()) throw InputError("no reports to compare");
    ComparisonTable table;
    std::vector<std::string> methods;
    for (const auto& r : reports) {
        if (!(r.range == reports.front().range))
            throw InputError("reports use different force ranges (" + r.method + ", " + r.group + ")");
        if (std::find(table.groups.begin(), table.groups.end(), r.group) == table.groups.end())
            table.groups.push_back(r.group);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    }
    std::stable_sort(methods.begin(), methods.end(),
                     [](const std::string& a, const std::string& b) { return method_rank(a) < method_rank(b); });

    std::map<std::pair<std::string, std::string>, double> cell;
    for (const auto& r : reports)
        if (!cell.emplace(std::make_pair(r.method, r.group), r.avg_mae).second)
            throw InputError("duplicate report for method '" + r.method + "' and group '" + r.group + "'");

    for (const auto& m : methods) {
        ComparisonTable::Row row{m, {}, 0.0};
        for (const auto& g : table.groups) {
            const auto it = cell.find({m, g});
            if (it == cell.end()) throw InputError("method '" + m + "' has no report for group '" + g + "'");
            row.values.push_back(it->second);
            row.average += it->second;
        }
        row.average /= static_cast<double>(table.groups.size());
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string render_text(const ComparisonTable& table) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"method"};
    header.insert(header.end(), table.groups.begin(), table.groups.end());
    header.push_back("Avg");
    cells.push_back(header);
    for (const auto& row : table.rows) {
        std::vector<std::string> line{row.method};
        for (double v : row.values) line.push_back(fixed3(v));
        line.push_back(fixed3(row.average));
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

    std::string out;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            const std::string pad(width[c] - line[c].size(), ' ');
            out += c == 0 ? line[c] + pad : "  " + pad + line[c];
        }
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const ComparisonTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows)
        rows.push_back({{"method", row.method}, {"values", row.values}, {"avg", row.average}});
    return {{"format_version", kReportFormatVersion}, {"groups", table.groups}, {"rows", rows},
            {"unit", "N"}, {"avg_mae_convention", kAverageConvention}};
}

}  // namespace tactile::eval
