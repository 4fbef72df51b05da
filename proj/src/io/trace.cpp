#include "tactile/io/trace.hpp"

namespace tactile::io {

nlohmann::json trace_to_json(const train::EpochTrace& e) {
    return nlohmann::json{{"epoch", e.epoch}, {"iteration", e.iteration}, {"L_r", e.regression},
                          {"L_c", e.classification}, {"L_t", e.transfer}, {"eta", e.eta}};
}

std::string trace_to_jsonl(const std::vector<train::EpochTrace>& trace) {
    std::string out;
    for (const auto& e : trace) out += trace_to_json(e).dump() + "\n";
    return out;
}

}  // namespace tactile::io
