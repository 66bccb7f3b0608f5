#pragma once

#include <array>
#include <cstdint>

#include "paretofact/data/dataset.hpp"

namespace paretofact::data {

// Fractions for (gan_train, target_train, target_holdout).
using SplitFractions = std::array<double, 3>;

// Seeded shuffle of [0, n) cut into three consecutive parts. The first two
// sizes are round(n * f); the holdout takes the remainder, so the parts
// always cover the dataset. Fractions must be positive and sum to 1 within
// 1e-9, otherwise ContractError.
SplitPlan make_split(std::size_t n, const SplitFractions& fractions, std::uint64_t seed);
SplitPlan make_split(const AnnotatedDataset& dataset, const SplitFractions& fractions, std::uint64_t seed);

// For a dataset whose rows [n, 2n) are copies of rows [0, n): every copy
// joins the part of its source, so no source/copy pair straddles a split.
SplitPlan extend_to_copies(const SplitPlan& plan, std::size_t n);

}  // namespace paretofact::data
