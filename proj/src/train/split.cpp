#include "tactile/train/split.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "tactile/core/error.hpp"
#include "tactile/core/rng.hpp"

namespace tactile::train {

void SplitRatios::validate() const {
    if (train < 0 || valid < 0 || test < 0) throw InputError("split ratios must be nonnegative");
    if (std::abs(train + valid + test - 1.0) > 1e-9) throw InputError("split ratios must sum to 1");
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
    ratios.validate();
    // Small epsilon so that e.g. 0.2 * 10 floors to 2, not 1.
    const auto valid = static_cast<std::size_t>(std::floor(ratios.valid * static_cast<double>(n) + 1e-9));
    const auto test = static_cast<std::size_t>(std::floor(ratios.test * static_cast<double>(n) + 1e-9));
    return {n - valid - test, valid, test};
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    auto rng = make_stream(seed, stream);
    for (std::size_t i = n; i > 1; --i) {
        // Unbiased draw from [0, i) by rejection.
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do r = rng();
        while (r >= limit);
        std::swap(perm[i - 1], perm[r % bound]);
    }
    return perm;
}

TargetSplit split_target(const sim::Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed) {
    if (dataset.empty()) throw InputError("cannot split an empty dataset");
    const auto sizes = split_sizes(dataset.size(), ratios);
    const auto perm = seeded_permutation(dataset.size(), seed, 0x5117);
    std::vector<std::size_t> parts[3];
    std::size_t k = 0;
    for (int p = 0; p < 3; ++p)
        for (std::size_t i = 0; i < sizes[p]; ++i) parts[p].push_back(perm[k++]);

    TargetSplit out{dataset.subset(parts[0]), dataset.subset(parts[1]), dataset.subset(parts[2])};
    for (auto& s : out.train.samples) s.split = sim::Split::Train;
    for (auto& s : out.valid.samples) s.split = sim::Split::Valid;
    for (auto& s : out.test.samples) s.split = sim::Split::Test;
    return out;
}

}  // namespace tactile::train
