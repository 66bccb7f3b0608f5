#pragma once

#include <filesystem>

#include "paretofact/data/dataset.hpp"

namespace paretofact::data {

// Reads an IDX image file (magic 0x00000803, uint8 [n x rows x cols]) and its
// label file (magic 0x00000801, uint8 [n]). Pixels are scaled by 1/255 into a
// single channel; the attribute vector is the one-hot label over
// max(10, max_label + 1) classes. Throws FormatError with byte offsets.
AnnotatedDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

// Writes the dataset back as IDX. Pixels are rounded to the nearest of the
// 256 levels, so a loaded file re-serializes byte-identically.
void save_idx(const AnnotatedDataset& dataset, const std::filesystem::path& images,
              const std::filesystem::path& labels);

}  // namespace paretofact::data
