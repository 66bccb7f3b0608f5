#include "paretofact/data/split.hpp"

#include <cmath>
#include <numeric>

#include "paretofact/common/error.hpp"
#include "paretofact/common/rng.hpp"

namespace paretofact::data {

SplitPlan make_split(std::size_t n, const SplitFractions& f, std::uint64_t seed) {
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!(f[k] > 0.0)) {
      throw ContractError("split fraction " + std::to_string(k) + " must be positive, got " + std::to_string(f[k]));
    }
  }
  const double total = f[0] + f[1] + f[2];
  if (std::abs(total - 1.0) > 1e-9) {
    throw ContractError("split fractions sum to " + std::to_string(total) + ", expected 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const auto a = static_cast<std::size_t>(std::llround(static_cast<double>(n) * f[0]));
  const auto b = std::min(n - std::min(a, n), static_cast<std::size_t>(std::llround(static_cast<double>(n) * f[1])));
  SplitPlan plan;
  plan.seed = seed;
  plan.gan_train.assign(order.begin(), order.begin() + std::min(a, n));
  plan.target_train.assign(order.begin() + plan.gan_train.size(), order.begin() + plan.gan_train.size() + b);
  plan.target_holdout.assign(order.begin() + plan.gan_train.size() + b, order.end());
  return plan;
}

SplitPlan make_split(const AnnotatedDataset& dataset, const SplitFractions& fractions, std::uint64_t seed) {
  return make_split(dataset.size(), fractions, seed);
}

SplitPlan extend_to_copies(const SplitPlan& plan, std::size_t n) {
  SplitPlan out = plan;
  for (auto* part : {&out.gan_train, &out.target_train, &out.target_holdout}) {
    const std::size_t k = part->size();
    for (std::size_t i = 0; i < k; ++i) {
      if ((*part)[i] >= n) throw ContractError("extend_to_copies: index " + std::to_string((*part)[i]) + " >= " + std::to_string(n));
      part->push_back((*part)[i] + n);
    }
  }
  return out;
}

}  // namespace paretofact::data
