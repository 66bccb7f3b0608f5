#include "paretofact/gan/losses.hpp"

#include <cmath>
#include <string>

namespace paretofact::gan {

using num::Var;

void LossWeights::validate() const {
  const double w[] = {lambda1, lambda2, lambda3};
  const char* names[] = {"lambda1", "lambda2", "lambda3"};
  for (int i = 0; i < 3; ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) {
      throw ContractError(std::string("loss weight ") + names[i] + " must be a finite value >= 0, got " +
                          std::to_string(w[i]));
    }
  }
}

AttributeVector sample_attribute_prior(Rng& rng, std::size_t n) {
  if (n == 0) throw ContractError("sample_attribute_prior: attribute count must be >= 1");
  AttributeVector out(n);
  for (auto& v : out) v = static_cast<float>(rng.uniform());
  return out;
}

num::Tensor sample_attribute_prior(Rng& rng, std::size_t rows, std::size_t n) {
  if (n == 0) throw ContractError("sample_attribute_prior: attribute count must be >= 1");
  num::Tensor out(num::Shape{rows, n});
  for (auto& v : out.values()) v = static_cast<float>(rng.uniform());
  return out;
}

template <typename T>
Var loss_rec(num::BasicGraph<T>& g, Var x, Var x_rec) {
  return num::mean(g, num::abs(g, num::sub(g, x, x_rec)));
}

template <typename T>
Var loss_att(num::BasicGraph<T>& g, const num::BasicTensor<T>& b, Var b_hat) {
  return num::binary_cross_entropy(g, b, b_hat);
}

template <typename T>
Var loss_adv_g(num::BasicGraph<T>& g, Var fake_scores) {
  return num::scale(g, num::mean(g, fake_scores), -1.0);
}

template <typename T>
Var loss_adv_d(num::BasicGraph<T>& g, Var real_scores, Var fake_scores) {
  return num::sub(g, num::mean(g, fake_scores), num::mean(g, real_scores));
}

template <typename T>
Var loss_plausibility(num::BasicGraph<T>& g, Var real_plaus, Var fake_plaus) {
  const auto ones = num::BasicTensor<T>::full(g.value(real_plaus).shape(), T{1});
  const auto zeros = num::BasicTensor<T>(g.value(fake_plaus).shape());
  return num::add(g, num::binary_cross_entropy(g, ones, real_plaus),
                  num::binary_cross_entropy(g, zeros, fake_plaus));
}

namespace {

template <typename T>
void check_batch(const BasicModelBundle<T>& bundle, const BasicBatch<T>& batch) {
  const auto& im = batch.images;
  if (im.rank() != 2 || im.shape()[1] != bundle.shape.image_size()) {
    throw DimensionError("batch images " + num::shape_string(im.shape()) +
                         " do not match image size " + std::to_string(bundle.shape.image_size()));
  }
  if (!bundle.conditional()) return;
  const num::Shape want{im.shape()[0], bundle.shape.attributes};
  if (batch.attributes.shape() != want) {
    throw DimensionError("batch attributes " + num::shape_string(batch.attributes.shape()) +
                         " expected " + num::shape_string(want));
  }
  if (batch.sampled.shape() != want) {
    throw DimensionError("batch sampled attributes " + num::shape_string(batch.sampled.shape()) +
                         " expected " + num::shape_string(want));
  }
}

}  // namespace

template <typename T>
GeneratorTerms loss_generator(num::BasicGraph<T>& g, BasicModelBundle<T>& bundle,
                              const BasicBatch<T>& batch, const LossWeights& weights) {
  weights.validate();
  check_batch(bundle, batch);
  const Var x = g.input(batch.images);
  const Var z = bundle.encode(g, x);
  GeneratorTerms t;
  if (!bundle.conditional()) {
    const Var x_prime = bundle.decode(g, z, z);
    t.rec = loss_rec(g, x, x_prime);
    t.adv = loss_adv_g(g, bundle.critic_head.forward(g, bundle.features(g, x_prime)));
    t.total = num::add(g, num::scale(g, t.rec, weights.lambda1), t.adv);
    t.att = t.total;
    return t;
  }
  const Var x_rec = bundle.decode(g, z, g.input(batch.attributes));
  const Var x_b = bundle.decode(g, z, g.input(batch.sampled));
  const Var feats = bundle.features(g, x_b);
  t.rec = loss_rec(g, x, x_rec);
  t.att = loss_att(g, batch.sampled, bundle.attribute_head.forward(g, feats));
  t.adv = loss_adv_g(g, bundle.critic_head.forward(g, feats));
  t.total = num::add(g, num::add(g, num::scale(g, t.rec, weights.lambda1),
                                 num::scale(g, t.att, weights.lambda2)),
                     t.adv);
  return t;
}

template <typename T>
CriticTerms loss_discriminator_classifier(num::BasicGraph<T>& g, BasicModelBundle<T>& bundle,
                                          const BasicBatch<T>& batch, const LossWeights& weights,
                                          Var fakes) {
  weights.validate();
  check_batch(bundle, batch);
  const Var real = g.input(batch.images);
  const Var real_feats = bundle.features(g, real);
  const Var fake_feats = bundle.features(g, fakes);
  CriticTerms t;
  t.adv = loss_adv_d(g, bundle.critic_head.forward(g, real_feats),
                     bundle.critic_head.forward(g, fake_feats));
  t.plausibility = loss_plausibility(g, bundle.plausibility_head.forward(g, real_feats),
                                     bundle.plausibility_head.forward(g, fake_feats));
  if (!bundle.conditional()) {
    t.total = t.adv;
    t.att = t.adv;
    return t;
  }
  t.att = loss_att(g, batch.attributes, bundle.attribute_head.forward(g, real_feats));
  t.total = num::add(g, num::scale(g, t.att, weights.lambda3), t.adv);
  return t;
}

template <typename T>
num::BasicTensor<T> generate_fakes(const BasicModelBundle<T>& bundle, const BasicBatch<T>& batch) {
  check_batch(bundle, batch);
  const auto z = bundle.encode(batch.images);
  return bundle.decode(z, bundle.conditional() ? batch.sampled : z);
}

double loss_rec(const num::Tensor& x, const num::Tensor& x_rec) {
  num::Graph g;
  const Var v = loss_rec(g, g.input(x), g.input(x_rec));
  return g.value(v)[0];
}

double loss_att(const num::Tensor& b, const num::Tensor& b_hat) {
  num::Graph g;
  const Var v = loss_att(g, b, g.input(b_hat));
  return g.value(v)[0];
}

double loss_adv_g(std::span<const double> fake_scores) {
  if (fake_scores.empty()) return 0.0;
  num::BasicGraph<double> g;
  const Var s = g.input(num::BasicTensor<double>(
      num::Shape{fake_scores.size()}, std::vector<double>(fake_scores.begin(), fake_scores.end())));
  return g.value(loss_adv_g(g, s))[0];
}

template <typename T>
GeneratorLoss evaluate_generator_loss(const BasicModelBundle<T>& bundle, const BasicBatch<T>& batch,
                                      const LossWeights& weights) {
  // Forward passes never write to parameters, so a const bundle is safe.
  auto& b = const_cast<BasicModelBundle<T>&>(bundle);
  num::BasicGraph<T> g;
  const auto t = loss_generator(g, b, batch, weights);
  return GeneratorLoss{static_cast<double>(g.value(t.total)[0]), static_cast<double>(g.value(t.rec)[0]),
                       b.conditional() ? static_cast<double>(g.value(t.att)[0]) : 0.0,
                       static_cast<double>(g.value(t.adv)[0])};
}

template <typename T>
CriticLoss evaluate_critic_loss(const BasicModelBundle<T>& bundle, const BasicBatch<T>& batch,
                                const LossWeights& weights) {
  auto& b = const_cast<BasicModelBundle<T>&>(bundle);
  num::BasicGraph<T> g;
  const Var fakes = g.input(generate_fakes(bundle, batch));
  const auto t = loss_discriminator_classifier(g, b, batch, weights, fakes);
  return CriticLoss{static_cast<double>(g.value(t.total)[0]),
                    b.conditional() ? static_cast<double>(g.value(t.att)[0]) : 0.0,
                    static_cast<double>(g.value(t.adv)[0]),
                    static_cast<double>(g.value(t.plausibility)[0])};
}

#define PARETOFACT_INSTANTIATE_LOSSES(T)                                                     \
  template Var loss_rec(num::BasicGraph<T>&, Var, Var);                                      \
  template Var loss_att(num::BasicGraph<T>&, const num::BasicTensor<T>&, Var);               \
  template Var loss_adv_g(num::BasicGraph<T>&, Var);                                         \
  template Var loss_adv_d(num::BasicGraph<T>&, Var, Var);                                    \
  template Var loss_plausibility(num::BasicGraph<T>&, Var, Var);                             \
  template GeneratorTerms loss_generator(num::BasicGraph<T>&, BasicModelBundle<T>&,          \
                                         const BasicBatch<T>&, const LossWeights&);          \
  template CriticTerms loss_discriminator_classifier(num::BasicGraph<T>&, BasicModelBundle<T>&, \
                                                     const BasicBatch<T>&, const LossWeights&, \
                                                     Var);                                   \
  template num::BasicTensor<T> generate_fakes(const BasicModelBundle<T>&, const BasicBatch<T>&); \
  template GeneratorLoss evaluate_generator_loss(const BasicModelBundle<T>&,                 \
                                                 const BasicBatch<T>&, const LossWeights&);  \
  template CriticLoss evaluate_critic_loss(const BasicModelBundle<T>&, const BasicBatch<T>&, \
                                           const LossWeights&);

PARETOFACT_INSTANTIATE_LOSSES(float)
PARETOFACT_INSTANTIATE_LOSSES(double)

#undef PARETOFACT_INSTANTIATE_LOSSES

}  // namespace paretofact::gan
