#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tactile/sim/dataset.hpp"

namespace tactile::train {

struct SplitRatios {
    double train = 0.6;
    double valid = 0.2;
    double test = 0.2;
    void validate() const;
    friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

struct TargetSplit {
    sim::Dataset train;
    sim::Dataset valid;
    sim::Dataset test;
};

/// Seeded shuffle, then floor(ratio * N) samples for valid and test with the
/// remainder in train. Samples are tagged with their split.
TargetSplit split_target(const sim::Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed);

/// Split sizes (train, valid, test) for N samples.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

/// Fisher-Yates permutation of [0, n) driven by (seed, stream).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed, std::uint64_t stream);

}  // namespace tactile::train
