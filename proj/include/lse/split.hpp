#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lse/dataset.hpp"

namespace lse {

// Disjoint row partition covering [0, n) exactly once.
struct RowSplit {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    std::vector<std::size_t> test_idx;
    std::uint64_t seed = 0;
};

struct SplitFractions {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

// Seeded uniform shuffle, then floor-sized val/test with the remainder going
// to train. Indices within each part keep the shuffled order.
RowSplit row_split(std::size_t n, SplitFractions fractions, std::uint64_t seed);

// Feature-wise split specification: either a fraction for peer A (columns are
// shuffled by seed, then cut) or two explicit disjoint covering name lists.
struct VerticalSpec {
    std::optional<double> fraction;
    std::vector<std::string> peer_a_columns;
    std::vector<std::string> peer_b_columns;
};

struct VerticalSplitResult {
    Dataset peer_a;
    Dataset peer_b;
};

// Both peers keep the full id vector and target; feature columns are
// partitioned between them.
VerticalSplitResult vertical_split(const Dataset& ds, const VerticalSpec& spec, std::uint64_t seed);

}  // namespace lse
