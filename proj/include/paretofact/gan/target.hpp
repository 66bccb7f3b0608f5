#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "paretofact/data/dataset.hpp"
#include "paretofact/gan/mlp.hpp"

namespace paretofact::gan {

// The audited black-box classifier. Callers outside training only see
// softmax outputs.
struct TargetModel {
  Mlp network;  // softmax head over class_labels.size() outputs
  std::vector<std::string> class_labels;

  std::size_t class_count() const { return class_labels.size(); }
  // Softmax over classes for one image.
  std::vector<double> predict_proba(std::span<const float> image) const;
  // [batch x L] softmax rows.
  num::Tensor predict_proba(const num::Tensor& images) const;
  std::size_t predict(std::span<const float> image) const;
};

struct TargetConfig {
  std::vector<std::size_t> hidden{64};
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct TargetTraining {
  TargetModel model;
  double holdout_accuracy = 0.0;
  std::vector<double> loss_history;  // mean cross-entropy per epoch
};

// Trains on plan.target_train and scores plan.target_holdout. Refuses with
// LeakageError when the split parts overlap.
TargetTraining train_target(const data::AnnotatedDataset& dataset, const data::SplitPlan& plan,
                            const TargetConfig& config);

// Fraction of `indices` whose argmax prediction equals the label.
double accuracy(const TargetModel& model, const data::AnnotatedDataset& dataset,
                std::span<const std::size_t> indices);

}  // namespace paretofact::gan
