#include "tactile/core/types.hpp"

#include <cmath>
#include <string>

#include "tactile/core/error.hpp"

namespace tactile {

void DomainConfig::validate() const {
    if (illumination_index < 0 || illumination_index > 2)
        throw InputError("illumination_index must be in {0,1,2}, got " +
                         std::to_string(illumination_index));
    if (elastomer_index < 0 || elastomer_index > 2)
        throw InputError("elastomer_index must be in {0,1,2}, got " +
                         std::to_string(elastomer_index));
}

std::string DomainConfig::label() const {
    return std::string(markers ? "m" : "wm") + "b" + std::to_string(elastomer_index) + "i" +
           std::to_string(illumination_index);
}

void NormalizationSpec::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (!std::isfinite(min[a]) || !std::isfinite(max[a]))
            throw InputError("normalization spec has non-finite bounds on axis " + std::to_string(a));
        if (!(max[a] > min[a]))
            throw InputError("degenerate normalization spec on axis " + std::to_string(a) +
                             " (max must exceed min)");
    }
}

}  // namespace tactile
