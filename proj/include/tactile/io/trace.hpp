#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tactile/train/trainer.hpp"

namespace tactile::io {

/// One line: {"epoch", "iteration", "L_r", "L_c", "L_t", "eta"}.
nlohmann::json trace_to_json(const train::EpochTrace& entry);
/// JSON lines, one per epoch, newline-terminated.
std::string trace_to_jsonl(const std::vector<train::EpochTrace>& trace);

}  // namespace tactile::io
