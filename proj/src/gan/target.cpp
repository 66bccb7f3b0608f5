#include "paretofact/gan/target.hpp"

#include <algorithm>
#include <cmath>

#include "paretofact/common/rng.hpp"
#include "paretofact/gan/optimizer.hpp"

namespace paretofact::gan {

std::vector<double> TargetModel::predict_proba(std::span<const float> image) const {
  num::Tensor x(num::Shape{1, image.size()}, std::vector<float>(image.begin(), image.end()));
  const num::Tensor p = network.infer(x);
  return std::vector<double>(p.values().begin(), p.values().end());
}

num::Tensor TargetModel::predict_proba(const num::Tensor& images) const {
  return network.infer(images);
}

std::size_t TargetModel::predict(std::span<const float> image) const {
  const auto p = predict_proba(image);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double accuracy(const TargetModel& model, const data::AnnotatedDataset& dataset,
                std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  const num::Tensor probs = model.predict_proba(dataset.gather_images(indices));
  std::size_t correct = 0;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto row = probs.row(r);
    const auto pred = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (pred == dataset.labels[indices[r]]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

TargetTraining train_target(const data::AnnotatedDataset& dataset, const data::SplitPlan& plan,
                            const TargetConfig& config) {
  data::require_disjoint(plan);
  if (plan.target_train.empty()) throw ContractError("train_target: empty target_train split");
  if (config.batch_size == 0) throw ContractError("target_training.batch_size must be >= 1");
  const std::size_t classes = std::max<std::size_t>(dataset.class_count(), 2);

  std::vector<std::size_t> sizes{dataset.pixels()};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(classes);

  TargetTraining out;
  out.model.network = Mlp(sizes, Head::softmax);
  out.model.class_labels = dataset.class_names;
  while (out.model.class_labels.size() < classes) {
    out.model.class_labels.push_back("class_" + std::to_string(out.model.class_labels.size()));
  }
  Rng rng(config.seed);
  out.model.network.initialize(rng);

  Sgd opt(config.learning_rate, config.momentum);
  auto params = out.model.network.parameters();
  std::vector<std::size_t> order = plan.target_train;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      num::Tensor onehot(num::Shape{rows.size(), classes});
      for (std::size_t r = 0; r < rows.size(); ++r) {
        onehot.at(r, static_cast<std::size_t>(dataset.labels[rows[r]])) = 1.0f;
      }
      zero_grads(params);
      num::Graph g;
      const num::Var probs = out.model.network.forward(g, g.input(dataset.gather_images(rows)));
      const num::Var loss = num::cross_entropy(g, onehot, probs);
      g.backward(loss);
      opt.step(params);
      total += g.value(loss)[0];
      ++steps;
    }
    const double mean = total / static_cast<double>(steps);
    if (!std::isfinite(mean)) throw TrainingError("train_target: loss diverged", epoch);
    out.loss_history.push_back(mean);
  }
  zero_grads(params);
  out.holdout_accuracy = accuracy(out.model, dataset, plan.target_holdout);
  return out;
}

}  // namespace paretofact::gan
