#include "paretofact/analysis/metrics.hpp"

#include <cmath>

#include "paretofact/common/error.hpp"

namespace paretofact::analysis {

double luminance(double r, double g, double b) {
  for (double c : {r, g, b}) {
    if (!(c >= 0.0 && c <= 255.0)) {
      throw ContractError("luminance: channel value " + std::to_string(c) + " outside [0,255]");
    }
  }
  // Channels are normalized first so white sums the coefficients to exactly 1.
  return kLumaR * (r / 255.0) + kLumaG * (g / 255.0) + kLumaB * (b / 255.0);
}

num::Tensor luminance_image(std::span<const float> image, std::size_t height, std::size_t width,
                            std::size_t channels) {
  const std::size_t n = height * width;
  if (image.size() != n * channels || (channels != 1 && channels != 3)) {
    throw DimensionError("luminance_image: " + std::to_string(image.size()) + " values do not form a " +
                         std::to_string(height) + "x" + std::to_string(width) + "x" +
                         std::to_string(channels) + " image with 1 or 3 channels");
  }
  num::Tensor out(num::Shape{height, width});
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = channels == 1 ? image[i]
                           : static_cast<float>(kLumaR * image[3 * i] + kLumaG * image[3 * i + 1] +
                                                kLumaB * image[3 * i + 2]);
  }
  return out;
}

num::Tensor class_luminance_map(const data::AnnotatedDataset& d, int label) {
  const std::size_t n = d.height * d.width;
  std::vector<double> acc(n, 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] != label) continue;
    const auto lum = luminance_image(d.image(i), d.height, d.width, d.channels);
    for (std::size_t p = 0; p < n; ++p) acc[p] += lum[p];
    ++count;
  }
  if (count == 0) throw ContractError("class_luminance_map: class " + std::to_string(label) + " has no instances");
  num::Tensor out(num::Shape{d.height, d.width});
  for (std::size_t p = 0; p < n; ++p) out[p] = static_cast<float>(acc[p] / static_cast<double>(count));
  return out;
}

double ssim(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size() || x.empty()) {
    throw DimensionError("ssim: image sizes " + std::to_string(x.size()) + " and " + std::to_string(y.size()) +
                         " differ or are empty");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double vx = 0, vy = 0, cov = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    vx += dx * dx;
    vy += dy * dy;
    cov += dx * dy;
  }
  vx /= n;
  vy /= n;
  cov /= n;
  return ((2 * mx * my + kSsimC1) * (2 * cov + kSsimC2)) /
         ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
}

double ssim_image(std::span<const float> x, std::span<const float> y, std::size_t height, std::size_t width,
                  std::size_t channels) {
  if (x.size() != y.size()) {
    throw DimensionError("ssim_image: image sizes " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()) + " differ");
  }
  if (channels == 1) return ssim(x, y);
  const auto lx = luminance_image(x, height, width, channels);
  const auto ly = luminance_image(y, height, width, channels);
  return ssim(lx.values(), ly.values());
}

num::Tensor diff_heatmap(std::span<const float> x, std::span<const float> y, std::size_t height,
                         std::size_t width, std::size_t channels) {
  const std::size_t n = height * width;
  if (x.size() != n * channels || y.size() != n * channels) {
    throw DimensionError("diff_heatmap: expected two images of " + std::to_string(n * channels) +
                         " values, got " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  num::Tensor out(num::Shape{height, width});
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0;
    for (std::size_t c = 0; c < channels; ++c) s += std::abs(static_cast<double>(x[p * channels + c]) - y[p * channels + c]);
    out[p] = static_cast<float>(s / static_cast<double>(channels));
  }
  return out;
}

BiasTable bias_table(const data::AnnotatedDataset& d, const std::vector<std::vector<std::size_t>>& combinations) {
  BiasTable table;
  table.attribute_names = d.attribute_names;
  table.class_names = d.class_names;
  for (const auto& combo : combinations) {
    for (std::size_t a : combo) {
      if (a >= d.attribute_count()) {
        throw ContractError("bias_table: attribute index " + std::to_string(a) + " outside [0," +
                            std::to_string(d.attribute_count()) + ")");
      }
    }
    BiasRow row{combo, std::vector<std::size_t>(d.class_count(), 0)};
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto attrs = d.attribute_vector(i);
      bool all = true;
      for (std::size_t a : combo) all = all && attrs[a] > kAttributeThreshold;
      if (all) ++row.counts.at(static_cast<std::size_t>(d.labels[i]));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::vector<std::size_t>> singles_and_pairs(std::size_t attributes) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < attributes; ++i) out.push_back({i});
  for (std::size_t i = 0; i < attributes; ++i) {
    for (std::size_t j = i + 1; j < attributes; ++j) out.push_back({i, j});
  }
  return out;
}

}  // namespace paretofact::analysis
