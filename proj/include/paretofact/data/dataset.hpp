#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paretofact/num/tensor.hpp"

namespace paretofact::data {

inline constexpr std::size_t kImageSide = 16;
inline constexpr std::size_t kImageChannels = 3;
inline constexpr std::size_t kImagePixels = kImageSide * kImageSide * kImageChannels;
inline constexpr std::size_t kBlobAttributes = 5;

// Which attribute is pushed towards "high" for which class, and how hard.
struct BiasSpec {
  std::size_t attribute = 0;
  int label = 1;
  double strength = 0.5;
};

// Images with per-instance attribute vectors and class labels. Images are
// stored row-per-instance, each row an (H, W, C) interleaved image in [0,1].
struct AnnotatedDataset {
  std::size_t height = kImageSide;
  std::size_t width = kImageSide;
  std::size_t channels = kImageChannels;
  std::vector<std::string> attribute_names;
  std::vector<std::string> class_names;
  num::Tensor images;      // [n x H*W*C]
  num::Tensor attributes;  // [n x N]
  std::vector<int> labels;
  std::uint64_t seed = 0;
  std::optional<BiasSpec> bias;
  std::string source = "blobs";

  std::size_t size() const { return labels.size(); }
  std::size_t pixels() const { return height * width * channels; }
  std::size_t attribute_count() const { return attribute_names.size(); }
  std::size_t class_count() const { return class_names.size(); }

  std::span<const float> image(std::size_t i) const { return images.row(i); }
  std::span<const float> attribute_vector(std::size_t i) const { return attributes.row(i); }

  // Instance counts per label, indexed by label.
  std::vector<std::size_t> class_counts() const;

  // Stacks the selected rows into [k x P] images and [k x N] attributes.
  num::Tensor gather_images(std::span<const std::size_t> indices) const;
  num::Tensor gather_attributes(std::span<const std::size_t> indices) const;

  // Subset keeping metadata.
  AnnotatedDataset subset(std::span<const std::size_t> indices) const;

  // Checks shapes, value ranges and label bounds; throws ContractError.
  void validate() const;
};

// Disjoint partition of dataset indices.
struct SplitPlan {
  std::vector<std::size_t> gan_train;
  std::vector<std::size_t> target_train;
  std::vector<std::size_t> target_holdout;
  std::uint64_t seed = 0;
};

// Throws LeakageError if any two parts share an index.
void require_disjoint(const SplitPlan& plan);

}  // namespace paretofact::data
