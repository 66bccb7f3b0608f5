#pragma once

#include <span>
#include <vector>

#include "paretofact/data/dataset.hpp"
#include "paretofact/num/tensor.hpp"

namespace paretofact::analysis {

inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

// Relative luminance of an 8-bit RGB pixel, in [0,1]. Channels outside
// [0,255] raise ContractError.
double luminance(double r, double g, double b);

// Per-pixel luminance of an interleaved image with values in [0,1]; returns
// [height x width]. Single-channel images are returned as-is.
num::Tensor luminance_image(std::span<const float> image, std::size_t height, std::size_t width,
                            std::size_t channels);

// Mean luminance map over every instance of `label`. Throws ContractError
// if the class has no instances.
num::Tensor class_luminance_map(const data::AnnotatedDataset& dataset, int label);

// SSIM over one global window, K1 = 0.01, K2 = 0.03, dynamic range 1.
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
double ssim(std::span<const float> x, std::span<const float> y);
// Colour images are compared on their luminance.
double ssim_image(std::span<const float> x, std::span<const float> y, std::size_t height,
                  std::size_t width, std::size_t channels);

// Per-pixel mean over channels of |x - y|; [height x width].
num::Tensor diff_heatmap(std::span<const float> x, std::span<const float> y, std::size_t height,
                         std::size_t width, std::size_t channels);

// Per requested attribute combination, how many instances of each class
// have every attribute of the combination above 0.5.
struct BiasRow {
  std::vector<std::size_t> combination;
  std::vector<std::size_t> counts;  // indexed by class label
};

struct BiasTable {
  std::vector<std::string> attribute_names;
  std::vector<std::string> class_names;
  std::vector<BiasRow> rows;
};

inline constexpr float kAttributeThreshold = 0.5f;

BiasTable bias_table(const data::AnnotatedDataset& dataset,
                     const std::vector<std::vector<std::size_t>>& combinations);

// Every combination of one and two attributes, in lexicographic order.
std::vector<std::vector<std::size_t>> singles_and_pairs(std::size_t attributes);

}  // namespace paretofact::analysis
