#pragma once

#include <span>
#include <vector>

#include "paretofact/common/rng.hpp"
#include "paretofact/gan/bundle.hpp"

namespace paretofact::gan {

// Per-attribute conditioning values, each in [0,1].
using AttributeVector = std::vector<float>;

struct LossWeights {
  double lambda1 = 50.0;   // reconstruction
  double lambda2 = 0.5;    // generator attribute loss
  double lambda3 = 1.0;    // classifier attribute loss

  // Throws ContractError on a negative or non-finite weight.
  void validate() const;
};

// One mini-batch. `sampled` holds a prior draw b per row; it is ignored in
// non-conditional mode.
template <typename T>
struct BasicBatch {
  num::BasicTensor<T> images;      // [B x P]
  num::BasicTensor<T> attributes;  // [B x N]
  num::BasicTensor<T> sampled;     // [B x N]
};

using Batch = BasicBatch<float>;

// Independent uniform draws on [0,1] per attribute.
AttributeVector sample_attribute_prior(Rng& rng, std::size_t n);
// [rows x n] tensor of prior draws, row-major draw order.
num::Tensor sample_attribute_prior(Rng& rng, std::size_t rows, std::size_t n);

// ---- graph building blocks; expectations are batch means ----

// Per-pixel mean of |x - x_rec|, averaged over the batch.
template <typename T>
num::Var loss_rec(num::BasicGraph<T>& g, num::Var x, num::Var x_rec);
// Sum over attributes of binary cross-entropy H(b_n, b_hat_n), batch mean.
template <typename T>
num::Var loss_att(num::BasicGraph<T>& g, const num::BasicTensor<T>& b, num::Var b_hat);
// -mean(critic scores on generated images).
template <typename T>
num::Var loss_adv_g(num::BasicGraph<T>& g, num::Var fake_scores);
// -mean(D(real)) + mean(D(fake)).
template <typename T>
num::Var loss_adv_d(num::BasicGraph<T>& g, num::Var real_scores, num::Var fake_scores);
// Binary cross-entropy of the plausibility head: real -> 1, fake -> 0.
template <typename T>
num::Var loss_plausibility(num::BasicGraph<T>& g, num::Var real_plaus, num::Var fake_plaus);

struct GeneratorTerms {
  num::Var total;
  num::Var rec;
  num::Var att;  // unset (equals total) in non-conditional mode
  num::Var adv;
};

// Conditional: lambda1*L_rec(x, G(x,a)) + lambda2*L_att(b, C(G(x,b))) - mean D(G(x,b)).
// Non-conditional: lambda1*L_rec(x, G(x)) - mean D(G(x)).
template <typename T>
GeneratorTerms loss_generator(num::BasicGraph<T>& g, BasicModelBundle<T>& bundle,
                              const BasicBatch<T>& batch, const LossWeights& weights);

struct CriticTerms {
  num::Var total;  // lambda3 * att + adv
  num::Var att;    // unset in non-conditional mode
  num::Var adv;
  num::Var plausibility;  // head trained alongside; not part of `total`
};

// `fakes` are generated images recorded on `g`: pass an input node to keep
// the generator out of the gradient, or a decode() result to keep it in.
template <typename T>
CriticTerms loss_discriminator_classifier(num::BasicGraph<T>& g, BasicModelBundle<T>& bundle,
                                          const BasicBatch<T>& batch, const LossWeights& weights,
                                          num::Var fakes);

// Images the critic sees as fake for this batch: G(x, b) or G(x).
template <typename T>
num::BasicTensor<T> generate_fakes(const BasicModelBundle<T>& bundle, const BasicBatch<T>& batch);

// ---- plain evaluations ----

double loss_rec(const num::Tensor& x, const num::Tensor& x_rec);
double loss_att(const num::Tensor& b, const num::Tensor& b_hat);
double loss_adv_g(std::span<const double> fake_scores);

struct GeneratorLoss {
  double total = 0, rec = 0, att = 0, adv = 0;
};
struct CriticLoss {
  double total = 0, att = 0, adv = 0, plausibility = 0;
};

template <typename T>
GeneratorLoss evaluate_generator_loss(const BasicModelBundle<T>& bundle, const BasicBatch<T>& batch,
                                      const LossWeights& weights);
template <typename T>
CriticLoss evaluate_critic_loss(const BasicModelBundle<T>& bundle, const BasicBatch<T>& batch,
                                const LossWeights& weights);

}  // namespace paretofact::gan
