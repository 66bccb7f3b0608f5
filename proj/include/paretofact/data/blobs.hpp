#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "paretofact/common/rng.hpp"
#include "paretofact/data/dataset.hpp"

namespace paretofact::data {

// Attribute order of the procedural blob images.
enum BlobAttribute : std::size_t {
  kHue = 0,
  kBrightness = 1,
  kRadius = 2,
  kBar = 3,
  kBorder = 4,
};

inline constexpr double kLabelNoise = 0.05;
inline constexpr double kPixelNoise = 0.02;

// Renders one 16x16x3 blob: a disc whose gray level follows brightness,
// tinted by a zero-mean chroma offset set by hue, with the given radius and
// a darker rim of the given thickness, optionally overlaid by a bright
// vertical bar. `rng` supplies pixel noise only.
std::array<float, kImagePixels> render_blob(std::span<const float> attributes, Rng& rng);

// n >= 50 instances with label = (brightness > 0.5) flipped with 5%
// probability. With a bias, the biased attribute is redrawn per instance so
// that P(attribute > 0.5 | label == bias.label) = strength and
// P(attribute > 0.5 | other label) = 1 - strength.
AnnotatedDataset generate_blobs(std::uint64_t seed, std::size_t n,
                                const std::optional<BiasSpec>& bias = std::nullopt);

// Throws ContractError naming the offending field.
void validate_bias(const BiasSpec& bias);

// Appends one copy of every instance with a random rectangle (25%-50% of
// the image area) zeroed out, labelled with a new trailing "erased" class.
// Copy i sits at index size() + i.
AnnotatedDataset augment_with_erased_class(const AnnotatedDataset& dataset, std::uint64_t seed);

}  // namespace paretofact::data
