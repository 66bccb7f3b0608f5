#include "paretofact/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "paretofact/common/error.hpp"

namespace paretofact::data {

std::vector<std::size_t> AnnotatedDataset::class_counts() const {
  std::vector<std::size_t> counts(class_count(), 0);
  for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
  return counts;
}

num::Tensor AnnotatedDataset::gather_images(std::span<const std::size_t> indices) const {
  num::Tensor out(num::Shape{indices.size(), pixels()});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = image(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

num::Tensor AnnotatedDataset::gather_attributes(std::span<const std::size_t> indices) const {
  num::Tensor out(num::Shape{indices.size(), attribute_count()});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = attribute_vector(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

AnnotatedDataset AnnotatedDataset::subset(std::span<const std::size_t> indices) const {
  AnnotatedDataset out = *this;
  out.images = gather_images(indices);
  out.attributes = gather_attributes(indices);
  out.labels.clear();
  for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  return out;
}

void AnnotatedDataset::validate() const {
  const std::size_t n = labels.size();
  if (n == 0) throw ContractError("dataset is empty");
  if (images.rank() != 2 || images.shape()[0] != n || images.shape()[1] != pixels()) {
    throw ContractError("dataset images have shape " + num::shape_string(images.shape()) +
                        ", expected [" + std::to_string(n) + "x" + std::to_string(pixels()) + "]");
  }
  if (attributes.rank() != 2 || attributes.shape()[0] != n ||
      attributes.shape()[1] != attribute_count()) {
    throw ContractError("dataset attributes have shape " + num::shape_string(attributes.shape()));
  }
  for (float v : images.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ContractError("dataset pixel outside [0,1]");
  }
  for (float v : attributes.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ContractError("dataset attribute outside [0,1]");
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= class_count()) {
      throw ContractError("dataset label " + std::to_string(l) + " outside [0," +
                          std::to_string(class_count()) + ")");
    }
  }
}

void require_disjoint(const SplitPlan& plan) {
  std::unordered_set<std::size_t> seen;
  auto add = [&](const std::vector<std::size_t>& part, const char* name) {
    for (std::size_t i : part) {
      if (!seen.insert(i).second) {
        throw LeakageError(std::string("split part '") + name + "' reuses instance " +
                           std::to_string(i) + " already assigned to another part");
      }
    }
  };
  add(plan.gan_train, "gan_train");
  add(plan.target_train, "target_train");
  add(plan.target_holdout, "target_holdout");
}

}  // namespace paretofact::data
