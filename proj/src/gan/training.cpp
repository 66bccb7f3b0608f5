#include "paretofact/gan/training.hpp"

#include <cmath>
#include <numeric>

#include "paretofact/gan/optimizer.hpp"

namespace paretofact::gan {

void TrainConfig::validate() const {
  weights.validate();
  if (batch_size == 0) throw ContractError("training.batch_size must be >= 1");
  if (n_critic == 0) throw ContractError("training.n_critic must be >= 1");
  if (!(learning_rate > 0.0)) throw ContractError("training.learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ContractError("training.momentum must be in [0,1)");
  if (!(clip > 0.0)) throw ContractError("training.clip must be > 0");
  if (!(max_grad_norm >= 0.0)) throw ContractError("training.max_grad_norm must be >= 0 (0 disables)");
}

namespace {

bool finite(const EpochLosses& e) {
  const double v[] = {e.rec, e.att_g, e.adv_g, e.generator, e.att_c, e.adv_d, e.critic, e.plausibility};
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

TrainHistory train(ModelBundle& bundle, const data::AnnotatedDataset& dataset,
                   std::span<const std::size_t> indices, const TrainConfig& config) {
  config.validate();
  if (indices.empty()) throw ContractError("train: empty training set");
  if (dataset.pixels() != bundle.shape.image_size()) {
    throw DimensionError("train: dataset images have " + std::to_string(dataset.pixels()) +
                         " values, bundle expects " + std::to_string(bundle.shape.image_size()));
  }
  if (bundle.conditional() && dataset.attribute_count() != bundle.shape.attributes) {
    throw DimensionError("train: dataset has " + std::to_string(dataset.attribute_count()) +
                         " attributes, bundle expects " + std::to_string(bundle.shape.attributes));
  }

  Rng rng(config.seed);
  Sgd gen_opt(config.learning_rate, config.momentum);
  Sgd crit_opt(config.learning_rate, config.momentum);
  auto gen_params = bundle.generator_parameters();
  auto crit_params = bundle.critic_parameters();
  auto clipped = bundle.clipped_parameters();
  std::vector<num::Parameter*> all_params;
  for (auto& [name, p] : bundle.named_parameters()) all_params.push_back(p);

  std::vector<std::size_t> order(indices.begin(), indices.end());
  const std::size_t n_attr = bundle.shape.attributes;
  TrainHistory history;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    EpochLosses sums;
    std::size_t critic_steps = 0, gen_steps = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      Batch batch;
      batch.images = dataset.gather_images(rows);
      batch.attributes = bundle.conditional() ? dataset.gather_attributes(rows)
                                              : num::Tensor(num::Shape{rows.size(), n_attr > 0 ? n_attr : 1});
      batch.sampled = sample_attribute_prior(rng, rows.size(), n_attr > 0 ? n_attr : 1);

      {
        zero_grads(all_params);
        num::Graph g;
        const num::Var fakes = g.input(generate_fakes(bundle, batch));
        const auto t = loss_discriminator_classifier(g, bundle, batch, config.weights, fakes);
        const num::Var total = num::add(g, t.total, t.plausibility);
        g.backward(total);
        crit_opt.step(crit_params);
        clip_values(clipped, config.clip);
        sums.critic += g.value(t.total)[0];
        sums.adv_d += g.value(t.adv)[0];
        if (bundle.conditional()) sums.att_c += g.value(t.att)[0];
        sums.plausibility += g.value(t.plausibility)[0];
        ++critic_steps;
      }

      if (critic_steps % config.n_critic == 0) {
        zero_grads(all_params);
        num::Graph g;
        const auto t = loss_generator(g, bundle, batch, config.weights);
        g.backward(t.total);
        if (config.max_grad_norm > 0.0) clip_grad_norm(gen_params, config.max_grad_norm);
        gen_opt.step(gen_params);
        sums.generator += g.value(t.total)[0];
        sums.rec += g.value(t.rec)[0];
        if (bundle.conditional()) sums.att_g += g.value(t.att)[0];
        sums.adv_g += g.value(t.adv)[0];
        ++gen_steps;
      }
    }
    zero_grads(all_params);

    EpochLosses mean;
    const double cs = static_cast<double>(critic_steps);
    mean.critic = sums.critic / cs;
    mean.adv_d = sums.adv_d / cs;
    mean.att_c = sums.att_c / cs;
    mean.plausibility = sums.plausibility / cs;
    if (gen_steps > 0) {
      const double gs = static_cast<double>(gen_steps);
      mean.generator = sums.generator / gs;
      mean.rec = sums.rec / gs;
      mean.att_g = sums.att_g / gs;
      mean.adv_g = sums.adv_g / gs;
    }
    if (!finite(mean)) throw TrainingError("train: loss diverged (non-finite value)", epoch);
    history.epochs.push_back(mean);
  }
  return history;
}

}  // namespace paretofact::gan
