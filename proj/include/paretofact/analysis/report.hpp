#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paretofact/analysis/metrics.hpp"
#include "paretofact/common/cgmf.hpp"
#include "paretofact/moea/nsga2.hpp"
#include "paretofact/objectives/objectives.hpp"

namespace paretofact::analysis {

struct MemberReport {
  std::vector<double> delta;
  objectives::ObjectiveTriple raw;
  objectives::DisplayTriple display;
  std::size_t predicted_class = 0;
  std::vector<double> proba;
  double critic_gap = 0.0;
  bool flip = false;  // predicted an original class other than the anchor's
  num::Tensor image;  // [1 x P]
};

struct FrontReport {
  std::vector<MemberReport> members;

  std::size_t anchor_index = 0;
  std::size_t anchor_class = 0;
  std::optional<std::size_t> target_class;
  std::vector<float> anchor_attributes;
  double anchor_plausibility = 0.0;
  num::Tensor anchor_image;

  // Training instance of the opposite (or target) class that T finds least
  // convincing as its own class.
  std::optional<std::size_t> exemplar_index;
  double exemplar_own_probability = 0.0;
  num::Tensor exemplar_image;

  std::vector<std::string> attribute_names;
  std::vector<std::string> class_names;
  std::size_t original_classes = 0;  // classes that count for a flip
  std::size_t height = 0, width = 0, channels = 0;
  objectives::ObjectiveConfig objectives;
  moea::NsgaConfig nsga;
  std::size_t evaluations = 0;

  std::vector<double> mean_abs_delta() const;
  std::size_t flip_count() const;
  std::size_t plausible_flip_count() const;
};

// Index of the smallest own-class probability; ties go to the lower index.
// Throws ContractError on an empty list.
std::size_t closest_adversarial(std::span<const double> own_class_probability);

// `candidates` are dataset indices searched for the exemplar (the target
// model's training split). `original_classes` bounds which predictions
// count as a flip; pass class_count() when no class was added.
FrontReport front_report(const moea::ParetoFront& front, const objectives::AnchorContext& ctx,
                         const gan::ModelBundle& bundle, const gan::TargetModel& target,
                         const data::AnnotatedDataset& dataset, std::span<const std::size_t> candidates,
                         std::size_t anchor_index, std::size_t original_classes,
                         const objectives::ObjectiveConfig& config);

// ---- serialization ----

nlohmann::json report_to_json(const FrontReport& report);
std::string report_to_csv(const FrontReport& report);
cgmf::File report_images(const FrontReport& report);
// Scatter of display plausibility against display power; circle area grows
// with intensity and plausible flips are filled.
std::string report_to_svg(const FrontReport& report);

// Writes report.json, front.csv, images.cgmf and front.svg into `dir`.
void write_front_report(const std::filesystem::path& dir, const FrontReport& report);
// Reads report.json and images.cgmf back; FormatError on malformed files.
FrontReport read_front_report(const std::filesystem::path& dir);

// Pairwise comparisons over {anchor} followed by every member image.
struct SimilarityMatrices {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> ssim;
  std::vector<std::vector<double>> mean_diff;
  std::vector<num::Tensor> anchor_heatmaps;  // diff_heatmap(anchor, member_i)
};

SimilarityMatrices similarity_matrices(const FrontReport& report);
std::string matrix_to_csv(const std::vector<std::string>& labels, const std::vector<std::vector<double>>& m);
std::string bias_table_to_csv(const BiasTable& table);

}  // namespace paretofact::analysis
