#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "paretofact/data/dataset.hpp"
#include "paretofact/data/split.hpp"
#include "paretofact/gan/bundle.hpp"
#include "paretofact/gan/target.hpp"
#include "paretofact/gan/training.hpp"
#include "paretofact/moea/nsga2.hpp"
#include "paretofact/objectives/objectives.hpp"

namespace paretofact::cli {

struct DatasetSpec {
  std::string source = "blobs";  // "blobs" or "idx"
  std::uint64_t seed = 42;
  std::size_t n = 2000;
  std::optional<data::BiasSpec> bias;
  bool augment_erased = false;
  std::uint64_t augment_seed = 43;
  std::filesystem::path idx_images;
  std::filesystem::path idx_labels;
};

struct SplitSpec {
  data::SplitFractions fractions{0.4, 0.4, 0.2};
  std::uint64_t seed = 42;
};

struct ModelSpec {
  std::size_t latent = 32;
  std::vector<std::size_t> hidden{256, 64};
  gan::Mode mode = gan::Mode::conditional;
  std::uint64_t seed = 42;
};

struct AuditSpec {
  std::optional<std::size_t> anchor;  // explicit dataset index, must be in the holdout
  std::uint64_t anchor_seed = 7;
};

struct RunConfig {
  DatasetSpec dataset;
  SplitSpec split;
  ModelSpec model;
  gan::TrainConfig training;
  gan::TargetConfig target_training;
  moea::NsgaConfig nsga;
  objectives::ObjectiveConfig objectives;
  std::optional<std::size_t> target_class;
  AuditSpec audit;
  // Attribute index combinations for the bias table; empty means every
  // single attribute and every pair.
  std::vector<std::vector<std::size_t>> combinations;
  std::string inject_broken_gradient;  // verify fixture: name of a gradient check to sabotage
  std::filesystem::path output_dir = "run";
};

// Every key with its default value. Config files may only use these keys.
nlohmann::json default_config_json();

// Merges `overrides` into the defaults, rejecting unknown keys, and parses
// the result. Relative paths resolve against `base_dir`. Errors are
// ContractError naming the dotted key.
RunConfig config_from_json(const nlohmann::json& overrides, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const RunConfig& config);

// Applies "a.b.c=value" to `j`. The value is parsed as JSON when possible
// and taken as a string otherwise.
void apply_override(nlohmann::json& j, std::string_view assignment);

// Reads the JSON file at `path` (IoError/FormatError naming it), applies the
// overrides in order and parses.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace paretofact::cli
