#include "paretofact/gan/bundle.hpp"

#include <numeric>

namespace paretofact::gan {

std::string_view mode_name(Mode mode) {
  return mode == Mode::conditional ? "conditional" : "non_conditional";
}

Mode parse_mode(std::string_view name) {
  if (name == "conditional") return Mode::conditional;
  if (name == "non_conditional") return Mode::non_conditional;
  throw ContractError("unknown generator mode '" + std::string(name) + "'");
}

std::size_t BundleShape::image_size() const {
  return std::accumulate(image_shape.begin(), image_shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::size_t BundleShape::decoder_input() const {
  return latent + (mode == Mode::conditional ? attributes : 0);
}

template <typename T>
BasicModelBundle<T> BasicModelBundle<T>::create(const BundleShape& shape, std::uint64_t seed) {
  if (shape.image_size() == 0 || shape.latent == 0) {
    throw ContractError("bundle: image size and latent width must be positive");
  }
  if (shape.mode == Mode::conditional && shape.attributes == 0) {
    throw ContractError("bundle: conditional mode needs at least one attribute");
  }
  BasicModelBundle b;
  b.shape = shape;
  b.seed = seed;

  std::vector<std::size_t> enc{shape.image_size()};
  enc.insert(enc.end(), shape.hidden.begin(), shape.hidden.end());
  enc.push_back(shape.latent);

  std::vector<std::size_t> dec{shape.decoder_input()};
  dec.insert(dec.end(), shape.hidden.rbegin(), shape.hidden.rend());
  dec.push_back(shape.image_size());

  std::vector<std::size_t> trunk{shape.image_size()};
  trunk.insert(trunk.end(), shape.hidden.begin(), shape.hidden.end());
  if (trunk.size() < 2) throw ContractError("bundle: critic trunk needs at least one hidden layer");
  const std::size_t feat = trunk.back();

  b.encoder = BasicMlp<T>(enc, Head::linear);
  b.decoder = BasicMlp<T>(dec, Head::sigmoid);
  b.trunk = BasicMlp<T>(trunk, Head::leaky_relu);
  b.critic_head = BasicMlp<T>({feat, 1}, Head::linear);
  b.plausibility_head = BasicMlp<T>({feat, 1}, Head::sigmoid);
  if (shape.mode == Mode::conditional) {
    b.attribute_head = BasicMlp<T>({feat, shape.attributes}, Head::sigmoid);
  }

  Rng rng(seed);
  b.encoder.initialize(rng);
  b.decoder.initialize(rng);
  b.trunk.initialize(rng);
  b.critic_head.initialize(rng);
  b.plausibility_head.initialize(rng);
  if (b.conditional()) b.attribute_head.initialize(rng);
  return b;
}

namespace {

template <typename T, typename Net>
void append_named(std::vector<std::pair<std::string, T>>& out, const std::string& prefix, Net& net) {
  auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.emplace_back(prefix + "." + std::to_string(i) + ".weight", &layers[i].weight);
    out.emplace_back(prefix + "." + std::to_string(i) + ".bias", &layers[i].bias);
  }
}

}  // namespace

template <typename T>
std::vector<std::pair<std::string, num::BasicParameter<T>*>> BasicModelBundle<T>::named_parameters() {
  std::vector<std::pair<std::string, num::BasicParameter<T>*>> out;
  append_named(out, "encoder", encoder);
  append_named(out, "decoder", decoder);
  append_named(out, "trunk", trunk);
  append_named(out, "critic_head", critic_head);
  append_named(out, "plausibility_head", plausibility_head);
  if (conditional()) append_named(out, "attribute_head", attribute_head);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const num::BasicParameter<T>*>>
BasicModelBundle<T>::named_parameters() const {
  std::vector<std::pair<std::string, const num::BasicParameter<T>*>> out;
  append_named(out, "encoder", encoder);
  append_named(out, "decoder", decoder);
  append_named(out, "trunk", trunk);
  append_named(out, "critic_head", critic_head);
  append_named(out, "plausibility_head", plausibility_head);
  if (conditional()) append_named(out, "attribute_head", attribute_head);
  return out;
}

template <typename T>
std::vector<num::BasicParameter<T>*> BasicModelBundle<T>::generator_parameters() {
  auto out = encoder.parameters();
  auto dec = decoder.parameters();
  out.insert(out.end(), dec.begin(), dec.end());
  return out;
}

template <typename T>
std::vector<num::BasicParameter<T>*> BasicModelBundle<T>::critic_parameters() {
  auto out = clipped_parameters();
  auto plaus = plausibility_head.parameters();
  out.insert(out.end(), plaus.begin(), plaus.end());
  if (conditional()) {
    auto attr = attribute_head.parameters();
    out.insert(out.end(), attr.begin(), attr.end());
  }
  return out;
}

template <typename T>
std::vector<num::BasicParameter<T>*> BasicModelBundle<T>::clipped_parameters() {
  auto out = trunk.parameters();
  auto head = critic_head.parameters();
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

template <typename T>
num::BasicTensor<T> BasicModelBundle<T>::encode(const Tensor& images) const {
  if (images.rank() != 2 || images.shape()[1] != shape.image_size()) {
    throw DimensionError("encode: image batch " + num::shape_string(images.shape()) +
                         " does not match image size " + std::to_string(shape.image_size()));
  }
  return encoder.infer(images);
}

template <typename T>
num::BasicTensor<T> BasicModelBundle<T>::decode(const Tensor& latent, const Tensor& attrs) const {
  if (latent.rank() != 2 || latent.shape()[1] != shape.latent) {
    throw DimensionError("decode: latent " + num::shape_string(latent.shape()) +
                         " does not match width " + std::to_string(shape.latent));
  }
  if (!conditional()) return decoder.infer(latent);
  if (attrs.rank() != 2 || attrs.shape()[0] != latent.shape()[0] ||
      attrs.shape()[1] != shape.attributes) {
    throw DimensionError("decode: attributes " + num::shape_string(attrs.shape()) + " expected [" +
                         std::to_string(latent.shape()[0]) + "x" + std::to_string(shape.attributes) +
                         "]");
  }
  const std::size_t m = latent.shape()[0], p = shape.latent, q = shape.attributes;
  Tensor joined(num::Shape{m, p + q});
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(latent.data() + i * p, p, joined.data() + i * (p + q));
    std::copy_n(attrs.data() + i * q, q, joined.data() + i * (p + q) + p);
  }
  return decoder.infer(joined);
}

template <typename T>
num::BasicTensor<T> BasicModelBundle<T>::critic_score(const Tensor& images) const {
  return critic_head.infer(trunk.infer(images));
}

template <typename T>
num::BasicTensor<T> BasicModelBundle<T>::plausibility(const Tensor& images) const {
  return plausibility_head.infer(trunk.infer(images));
}

template <typename T>
num::BasicTensor<T> BasicModelBundle<T>::predict_attributes(const Tensor& images) const {
  if (!conditional()) throw ContractError("predict_attributes: bundle has no attribute classifier");
  return attribute_head.infer(trunk.infer(images));
}

template <typename T>
num::Var BasicModelBundle<T>::encode(num::BasicGraph<T>& g, num::Var images) {
  return encoder.forward(g, images);
}

template <typename T>
num::Var BasicModelBundle<T>::decode(num::BasicGraph<T>& g, num::Var latent, num::Var attrs) {
  if (!conditional()) return decoder.forward(g, latent);
  const auto& av = g.value(attrs);
  if (av.rank() != 2 || av.shape()[1] != shape.attributes) {
    throw DimensionError("decode: attributes " + num::shape_string(av.shape()) +
                         " do not match count " + std::to_string(shape.attributes));
  }
  return decoder.forward(g, num::concat_cols(g, latent, attrs));
}

template <typename T>
num::Var BasicModelBundle<T>::features(num::BasicGraph<T>& g, num::Var images) {
  return trunk.forward(g, images);
}

template struct BasicModelBundle<float>;
template struct BasicModelBundle<double>;

}  // namespace paretofact::gan
