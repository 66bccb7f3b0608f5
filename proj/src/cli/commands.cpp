#include "paretofact/cli/commands.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "paretofact/analysis/metrics.hpp"
#include "paretofact/common/cgmf.hpp"
#include "paretofact/common/error.hpp"
#include "paretofact/common/rng.hpp"
#include "paretofact/data/blobs.hpp"
#include "paretofact/data/dataset_io.hpp"
#include "paretofact/data/idx.hpp"
#include "paretofact/gan/losses.hpp"
#include "paretofact/gan/model_io.hpp"
#include "paretofact/moea/counterfactual.hpp"

namespace paretofact::cli {

using nlohmann::json;

namespace {

constexpr const char* kErasedClass = "erased";

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
}

void write_json(const std::filesystem::path& path, const json& j) { cgmf::write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  const auto bytes = cgmf::read_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": malformed JSON: " + e.what(), e.byte);
  }
}

std::string counts_line(const data::AnnotatedDataset& ds) {
  std::string s;
  const auto counts = ds.class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    s += fmt::format("{}{}={}", k ? " " : "", ds.class_names.at(k), counts[k]);
  }
  return s;
}

data::SplitPlan load_split(const std::filesystem::path& path) {
  try {
    return data::split_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed split: " + e.what(), 0);
  }
}

}  // namespace

data::AnnotatedDataset build_dataset(const RunConfig& config) {
  const auto& d = config.dataset;
  data::AnnotatedDataset ds = d.source == "idx" ? data::load_idx(d.idx_images, d.idx_labels)
                                                : data::generate_blobs(d.seed, d.n, d.bias);
  if (d.augment_erased) ds = data::augment_with_erased_class(ds, d.augment_seed);
  return ds;
}

std::size_t original_class_count(const data::AnnotatedDataset& dataset) {
  const std::size_t n = dataset.class_count();
  return n > 0 && dataset.class_names.back() == kErasedClass ? n - 1 : n;
}

data::SplitPlan plan_split(const RunConfig& config, const data::AnnotatedDataset& dataset) {
  if (!config.dataset.augment_erased) return data::make_split(dataset, config.split.fractions, config.split.seed);
  if (original_class_count(dataset) == dataset.class_count() || dataset.size() % 2 != 0) {
    throw ContractError("dataset.augment_erased is set but the dataset has no erased copies; rerun gen-data");
  }
  const std::size_t n = dataset.size() / 2;
  return data::extend_to_copies(data::make_split(n, config.split.fractions, config.split.seed), n);
}

std::size_t choose_anchor(const data::AnnotatedDataset& dataset, const data::SplitPlan& plan,
                          std::optional<std::size_t> explicit_index, std::uint64_t seed) {
  if (explicit_index) {
    const std::size_t i = *explicit_index;
    if (i >= dataset.size()) {
      throw ContractError(fmt::format("anchor index {} is out of range for a dataset of {} instances", i, dataset.size()));
    }
    if (std::find(plan.target_holdout.begin(), plan.target_holdout.end(), i) == plan.target_holdout.end()) {
      throw ContractError(fmt::format("anchor index {} is not in the target_holdout split", i));
    }
    return i;
  }
  const std::size_t originals = original_class_count(dataset);
  std::vector<std::size_t> pool;
  for (std::size_t i : plan.target_holdout) {
    if (static_cast<std::size_t>(dataset.labels.at(i)) < originals) pool.push_back(i);
  }
  if (pool.empty()) throw ContractError("target_holdout split has no anchor candidates");
  Rng rng(seed);
  return pool[rng.below(pool.size())];
}

void cmd_gen_data(const RunConfig& config, std::ostream& out) {
  const RunPaths paths{config.output_dir};
  data::AnnotatedDataset ds = build_dataset(config);
  ensure_dir(paths.root);
  data::save_dataset(ds, paths.dataset());
  write_json(paths.manifest(), data::manifest(ds));
  out << fmt::format("dataset: {} instances from {} (seed {})\n", ds.size(), ds.source, ds.seed);
  out << fmt::format("classes: {}\n", counts_line(ds));
  if (ds.bias) {
    out << fmt::format("bias: attribute {} ({}) pushed high for class {} with strength {}\n", ds.bias->attribute,
                       ds.attribute_names.at(ds.bias->attribute), ds.bias->label, ds.bias->strength);
  } else {
    out << "bias: none\n";
  }
  out << fmt::format("wrote {} and {}\n", paths.dataset().string(), paths.manifest().string());
}

void cmd_train(const RunConfig& config, std::ostream& out) {
  const RunPaths paths{config.output_dir};
  const data::AnnotatedDataset ds = data::load_dataset(paths.dataset());
  const data::SplitPlan plan = plan_split(config, ds);
  data::require_disjoint(plan);

  const auto target = gan::train_target(ds, plan, config.target_training);
  out << fmt::format("target: holdout accuracy {:.4f} on {} instances\n", target.holdout_accuracy,
                     plan.target_holdout.size());

  gan::BundleShape shape;
  shape.image_shape = {ds.height, ds.width, ds.channels};
  shape.latent = config.model.latent;
  shape.attributes = ds.attribute_count();
  shape.hidden = config.model.hidden;
  shape.mode = config.model.mode;
  gan::ModelBundle bundle = gan::ModelBundle::create(shape, config.model.seed);
  const gan::TrainHistory history = gan::train(bundle, ds, plan.gan_train, config.training);

  const num::Tensor holdout = ds.gather_images(plan.target_holdout);
  const num::Tensor rec = bundle.decode(bundle.encode(holdout), ds.gather_attributes(plan.target_holdout));
  const double holdout_rec = gan::loss_rec(holdout, rec);
  const num::Tensor plaus = bundle.plausibility(holdout);
  double mean_plaus = 0;
  for (float p : plaus.values()) mean_plaus += p;
  mean_plaus /= static_cast<double>(plaus.size());
  out << fmt::format("gan: {} epochs, holdout reconstruction {:.4f}, holdout plausibility {:.4f}\n",
                     history.epochs.size(), holdout_rec, mean_plaus);

  json epochs = json::array();
  for (const auto& e : history.epochs) {
    epochs.push_back({{"rec", e.rec},
                      {"att_g", e.att_g},
                      {"adv_g", e.adv_g},
                      {"generator", e.generator},
                      {"att_c", e.att_c},
                      {"adv_d", e.adv_d},
                      {"critic", e.critic},
                      {"plausibility", e.plausibility}});
  }
  const json metrics = {
      {"kind", "metrics"},
      {"seeds",
       {{"dataset", ds.seed}, {"split", plan.seed}, {"model", config.model.seed}, {"training", config.training.seed},
        {"target_training", config.target_training.seed}}},
      {"split_sizes",
       {{"gan_train", plan.gan_train.size()},
        {"target_train", plan.target_train.size()},
        {"target_holdout", plan.target_holdout.size()}}},
      {"gan",
       {{"mode", gan::mode_name(shape.mode)},
        {"epochs", epochs},
        {"holdout_reconstruction", holdout_rec},
        {"holdout_plausibility", mean_plaus}}},
      {"target", {{"holdout_accuracy", target.holdout_accuracy}, {"loss_history", target.loss_history}}}};

  gan::save_bundle(paths.bundle(), bundle);
  gan::save_target(paths.target(), target.model);
  write_json(paths.split(), data::split_to_json(plan));
  write_json(paths.metrics(), metrics);
  out << fmt::format("wrote {}, {}, {} and {}\n", paths.bundle().string(), paths.target().string(),
                     paths.split().string(), paths.metrics().string());
}

analysis::FrontReport cmd_audit(const RunConfig& config, std::ostream& out) {
  const RunPaths paths{config.output_dir};
  const data::AnnotatedDataset ds = data::load_dataset(paths.dataset());
  const gan::ModelBundle bundle = gan::load_bundle(paths.bundle());
  const gan::TargetModel target = gan::load_target(paths.target());
  const data::SplitPlan plan = load_split(paths.split());
  data::require_disjoint(plan);

  const std::size_t anchor = choose_anchor(ds, plan, config.audit.anchor, config.audit.anchor_seed);
  const auto ctx =
      objectives::AnchorContext::make(bundle, target, ds.image(anchor), ds.attribute_vector(anchor), config.target_class);
  const moea::ParetoFront front = moea::evolve(ctx, bundle, target, config.nsga, config.objectives);
  const analysis::FrontReport report = analysis::front_report(front, ctx, bundle, target, ds, plan.target_train, anchor,
                                                              original_class_count(ds), config.objectives);
  ensure_dir(paths.audit());
  analysis::write_front_report(paths.audit(), report);

  out << fmt::format("anchor: index {} class {} ({}), plausibility {:.4f}\n", anchor, ctx.anchor_class,
                     target.class_labels.at(ctx.anchor_class), ctx.anchor_plausibility);
  out << fmt::format("front: {} members after {} evaluations, {} flips, {} plausible flips\n", report.members.size(),
                     report.evaluations, report.flip_count(), report.plausible_flip_count());
  const auto mad = report.mean_abs_delta();
  std::string line;
  for (std::size_t k = 0; k < mad.size(); ++k) {
    line += fmt::format("{}{}={:.4f}", k ? " " : "", report.attribute_names.at(k), mad[k]);
  }
  out << "mean |delta|: " << line << "\n";
  out << fmt::format("wrote {}\n", paths.audit().string());
  return report;
}

void cmd_report(const RunConfig& config, std::ostream& out) {
  const RunPaths paths{config.output_dir};
  const analysis::FrontReport report = analysis::read_front_report(paths.audit());
  const data::AnnotatedDataset ds = data::load_dataset(paths.dataset());
  const data::SplitPlan plan = load_split(paths.split());
  const data::AnnotatedDataset train = ds.subset(plan.target_train);
  ensure_dir(paths.analysis());

  // Class luminance maps over the target model's training data.
  cgmf::File maps;
  maps.header = {{"kind", "class_luminance"}, {"source", "target_train"}};
  const auto counts = train.class_counts();
  for (std::size_t k = 0; k < train.class_count(); ++k) {
    if (counts.at(k) == 0) continue;
    maps.tensors.push_back({"class_" + train.class_names[k], analysis::class_luminance_map(train, static_cast<int>(k))});
  }
  cgmf::write(paths.analysis() / "luminance.cgmf", maps);

  const auto combos = config.combinations.empty() ? analysis::singles_and_pairs(train.attribute_count()) : config.combinations;
  const analysis::BiasTable bias = analysis::bias_table(train, combos);
  cgmf::write_text(paths.analysis() / "bias.csv", analysis::bias_table_to_csv(bias));

  const analysis::SimilarityMatrices sim = analysis::similarity_matrices(report);
  cgmf::write_text(paths.analysis() / "ssim.csv", analysis::matrix_to_csv(sim.labels, sim.ssim));
  cgmf::write_text(paths.analysis() / "diff.csv", analysis::matrix_to_csv(sim.labels, sim.mean_diff));
  cgmf::File heat;
  heat.header = {{"kind", "anchor_diff_heatmaps"}};
  for (std::size_t k = 0; k < sim.anchor_heatmaps.size(); ++k) {
    heat.tensors.push_back({"member_" + std::to_string(k), sim.anchor_heatmaps[k]});
  }
  if (!heat.tensors.empty()) cgmf::write(paths.analysis() / "heatmaps.cgmf", heat);

  out << fmt::format("luminance maps: {} classes\n", maps.tensors.size());
  out << fmt::format("bias table: {} combinations over {} training instances\n", bias.rows.size(), train.size());
  double min_ssim = 1.0;
  for (std::size_t j = 1; j < sim.labels.size(); ++j) min_ssim = std::min(min_ssim, sim.ssim[0][j]);
  out << fmt::format("similarity: {} images, lowest SSIM to anchor {:.4f}\n", sim.labels.size(), min_ssim);
  out << fmt::format("wrote {}\n", paths.analysis().string());
}

}  // namespace paretofact::cli
