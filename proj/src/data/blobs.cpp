#include "paretofact/data/blobs.hpp"

#include <algorithm>
#include <cmath>

namespace paretofact::data {

namespace {

constexpr double kTwoPi = 6.283185307179586;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng instance_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  return Rng(splitmix(splitmix(seed) ^ splitmix(index * 4 + stream)));
}

}  // namespace

std::array<float, kImagePixels> render_blob(std::span<const float> a, Rng& rng) {
  if (a.size() != kBlobAttributes) {
    throw DimensionError("render_blob: expected " + std::to_string(kBlobAttributes) +
                         " attributes, got " + std::to_string(a.size()));
  }
  const double gray = 0.2 + 0.6 * a[kBrightness];
  const double theta = kTwoPi * a[kHue];
  const double chroma = 0.15;
  const double tint[3] = {chroma * std::cos(theta), chroma * std::cos(theta - kTwoPi / 3),
                          chroma * std::cos(theta + kTwoPi / 3)};
  const double radius = 3.5 + 3.5 * a[kRadius];
  const double rim = 0.5 + 2.0 * a[kBorder];
  const double bar = 0.8 * a[kBar];
  const double center = 7.5;

  std::array<float, kImagePixels> img{};
  for (std::size_t y = 0; y < kImageSide; ++y) {
    for (std::size_t x = 0; x < kImageSide; ++x) {
      const double d = std::hypot(static_cast<double>(x) - center, static_cast<double>(y) - center);
      for (std::size_t c = 0; c < kImageChannels; ++c) {
        double v = 0.1;
        if (d <= radius) {
          v = gray + tint[c];
          if (d > radius - rim) v *= 0.5;
        }
        if (x == 2 || x == 3) v = (1.0 - bar) * v + bar;
        v += kPixelNoise * rng.normal();
        img[(y * kImageSide + x) * kImageChannels + c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return img;
}

void validate_bias(const BiasSpec& bias) {
  if (bias.attribute >= kBlobAttributes) {
    throw ContractError("bias.attribute " + std::to_string(bias.attribute) + " is not in [0, " +
                        std::to_string(kBlobAttributes) + ")");
  }
  if (bias.attribute == kBrightness) {
    throw ContractError("bias.attribute must not be the class-defining brightness attribute (1)");
  }
  if (bias.label != 0 && bias.label != 1) {
    throw ContractError("bias.class " + std::to_string(bias.label) + " is not a blob class (0 or 1)");
  }
  if (!(bias.strength >= 0.0 && bias.strength <= 1.0)) {
    throw ContractError("bias.strength " + std::to_string(bias.strength) + " is not in [0, 1]");
  }
}

AnnotatedDataset generate_blobs(std::uint64_t seed, std::size_t n, const std::optional<BiasSpec>& bias) {
  if (n < 50) throw ContractError("generate_blobs: n must be >= 50, got " + std::to_string(n));
  if (bias) validate_bias(*bias);

  AnnotatedDataset ds;
  ds.attribute_names = {"hue", "brightness", "radius", "bar", "border"};
  ds.class_names = {"dim", "bright"};
  ds.images = num::Tensor(num::Shape{n, kImagePixels});
  ds.attributes = num::Tensor(num::Shape{n, kBlobAttributes});
  ds.labels.resize(n);
  ds.seed = seed;
  ds.bias = bias;
  ds.source = "blobs";

  for (std::size_t i = 0; i < n; ++i) {
    Rng attr_rng = instance_rng(seed, i, 0);
    auto attrs = ds.attributes.row(i);
    for (auto& v : attrs) v = static_cast<float>(attr_rng.uniform());
    int label = attrs[kBrightness] > 0.5f ? 1 : 0;
    if (attr_rng.bernoulli(kLabelNoise)) label = 1 - label;
    ds.labels[i] = label;
    if (bias) {
      const double p_high = label == bias->label ? bias->strength : 1.0 - bias->strength;
      const bool high = attr_rng.bernoulli(p_high);
      // Keep the drawn value on the chosen side of 0.5.
      const double u = attr_rng.uniform();
      attrs[bias->attribute] = static_cast<float>(high ? 0.5 + 0.5 * (1.0 - u) : 0.5 * u);
    }
    Rng pixel_rng = instance_rng(seed, i, 1);
    const auto img = render_blob(attrs, pixel_rng);
    std::copy(img.begin(), img.end(), ds.images.row(i).begin());
  }
  return ds;
}

AnnotatedDataset augment_with_erased_class(const AnnotatedDataset& dataset, std::uint64_t seed) {
  if (dataset.size() == 0) throw ContractError("augment_with_erased_class: empty dataset");
  const std::size_t n = dataset.size();
  const std::size_t h = dataset.height, w = dataset.width, ch = dataset.channels;
  const std::size_t p = dataset.pixels();
  const std::size_t na = dataset.attribute_count();

  AnnotatedDataset out = dataset;
  out.class_names.push_back("erased");
  const int erased_label = static_cast<int>(out.class_names.size() - 1);
  out.images = num::Tensor(num::Shape{2 * n, p});
  out.attributes = num::Tensor(num::Shape{2 * n, na});
  out.labels.resize(2 * n);
  std::copy(dataset.images.values().begin(), dataset.images.values().end(), out.images.data());
  std::copy(dataset.attributes.values().begin(), dataset.attributes.values().end(),
            out.attributes.data());

  const double area = static_cast<double>(h * w);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = instance_rng(seed, i, 2);
    const double target = area * rng.uniform(0.25, 0.5);
    const std::size_t min_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(target / h)));
    const std::size_t rw = min_w + rng.below(w - min_w + 1);
    const std::size_t rh = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(target / rw)), 1, h);
    const std::size_t x0 = rng.below(w - rw + 1);
    const std::size_t y0 = rng.below(h - rh + 1);

    auto dst = out.images.row(n + i);
    const auto src = dataset.image(i);
    std::copy(src.begin(), src.end(), dst.begin());
    for (std::size_t y = y0; y < y0 + rh; ++y) {
      for (std::size_t x = x0; x < x0 + rw; ++x) {
        for (std::size_t c = 0; c < ch; ++c) dst[(y * w + x) * ch + c] = 0.0f;
      }
    }
    const auto a = dataset.attribute_vector(i);
    std::copy(a.begin(), a.end(), out.attributes.row(n + i).begin());
    out.labels[i] = dataset.labels[i];
    out.labels[n + i] = erased_label;
  }
  return out;
}

}  // namespace paretofact::data
