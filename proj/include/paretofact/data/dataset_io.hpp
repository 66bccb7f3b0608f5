#pragma once

#include <filesystem>

#include <json.hpp>

#include "paretofact/data/dataset.hpp"

namespace paretofact::data {

// Manifest carried in the CGMF header and written alongside as JSON: source,
// seed, bias, geometry, names, size and per-class counts.
nlohmann::json manifest(const AnnotatedDataset& dataset);

// CGMF file with tensors "images", "attributes" and "labels" (labels stored
// as float [n]).
void save_dataset(const AnnotatedDataset& dataset, const std::filesystem::path& path);
AnnotatedDataset load_dataset(const std::filesystem::path& path);

nlohmann::json split_to_json(const SplitPlan& plan);
SplitPlan split_from_json(const nlohmann::json& j);

}  // namespace paretofact::data
