#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>

#include "paretofact/analysis/report.hpp"
#include "paretofact/cli/config.hpp"
#include "paretofact/data/dataset.hpp"

namespace paretofact::cli {

// File layout under RunConfig::output_dir.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path dataset() const { return root / "dataset.cgmf"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path bundle() const { return root / "bundle.cgmf"; }
  std::filesystem::path target() const { return root / "target.cgmf"; }
  std::filesystem::path split() const { return root / "split.json"; }
  std::filesystem::path metrics() const { return root / "metrics.json"; }
  std::filesystem::path audit() const { return root / "audit"; }
  std::filesystem::path analysis() const { return root / "analysis"; }
};

// Builds the configured dataset (blobs or IDX, optionally with erased
// copies) without touching the disk.
data::AnnotatedDataset build_dataset(const RunConfig& config);

// Classes a counterfactual may flip to: every class except a trailing
// "erased" class added by augmentation.
std::size_t original_class_count(const data::AnnotatedDataset& dataset);

// The split train uses. With erased copies, the split is drawn over the
// originals and every copy follows its source.
data::SplitPlan plan_split(const RunConfig& config, const data::AnnotatedDataset& dataset);

// Picks the audit anchor: `explicit_index` if given (ContractError when out
// of range or outside the holdout), else a seeded draw from the holdout
// restricted to original classes.
std::size_t choose_anchor(const data::AnnotatedDataset& dataset, const data::SplitPlan& plan,
                          std::optional<std::size_t> explicit_index, std::uint64_t seed);

void cmd_gen_data(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);
analysis::FrontReport cmd_audit(const RunConfig& config, std::ostream& out);
void cmd_report(const RunConfig& config, std::ostream& out);

}  // namespace paretofact::cli
