#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "paretofact/data/dataset.hpp"
#include "paretofact/gan/bundle.hpp"
#include "paretofact/gan/losses.hpp"

namespace paretofact::gan {

struct TrainConfig {
  std::size_t epochs = 80;
  std::size_t batch_size = 16;
  double learning_rate = 0.01;
  double momentum = 0.9;
  LossWeights weights;
  double clip = 0.01;         // critic weight clipping bound c
  std::size_t n_critic = 5;   // critic steps per generator step
  double max_grad_norm = 2.0;  // generator gradient norm cap; 0 disables
  std::uint64_t seed = 0;

  void validate() const;
};

// Batch means of every loss term over one epoch.
struct EpochLosses {
  double rec = 0, att_g = 0, adv_g = 0, generator = 0;
  double att_c = 0, adv_d = 0, critic = 0, plausibility = 0;
};

struct TrainHistory {
  std::vector<EpochLosses> epochs;
};

// Alternates n_critic critic/classifier steps with one generator step. One
// epoch is one shuffled pass over `indices` in critic batches. The trunk and
// raw critic head are clipped to [-clip, clip] after every critic step.
// Throws ContractError on an empty index set and TrainingError on a
// non-finite loss.
TrainHistory train(ModelBundle& bundle, const data::AnnotatedDataset& dataset,
                   std::span<const std::size_t> indices, const TrainConfig& config);

}  // namespace paretofact::gan
