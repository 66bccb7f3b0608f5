#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "paretofact/gan/mlp.hpp"

namespace paretofact::gan {

enum class Mode { conditional, non_conditional };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

struct BundleShape {
  std::vector<std::size_t> image_shape{16, 16, 3};
  std::size_t latent = 32;
  std::size_t attributes = 5;
  std::vector<std::size_t> hidden{256, 64};
  Mode mode = Mode::conditional;

  std::size_t image_size() const;
  // Decoder input: latent plus attributes when conditional.
  std::size_t decoder_input() const;
};

// Generator encoder/decoder, critic trunk with its three heads (raw critic
// score, sigmoid plausibility, sigmoid attribute classifier). D and C are
// the trunk followed by the respective head, so they share trunk storage.
// The attribute head exists only in conditional mode.
template <typename T>
struct BasicModelBundle {
  using Tensor = num::BasicTensor<T>;

  BundleShape shape;
  std::uint64_t seed = 0;
  BasicMlp<T> encoder;
  BasicMlp<T> decoder;
  BasicMlp<T> trunk;
  BasicMlp<T> critic_head;
  BasicMlp<T> plausibility_head;
  BasicMlp<T> attribute_head;

  // Builds all networks for `shape`, initialized from `seed`.
  static BasicModelBundle create(const BundleShape& shape, std::uint64_t seed);

  bool conditional() const { return shape.mode == Mode::conditional; }

  std::vector<std::pair<std::string, num::BasicParameter<T>*>> named_parameters();
  std::vector<std::pair<std::string, const num::BasicParameter<T>*>> named_parameters() const;
  std::vector<num::BasicParameter<T>*> generator_parameters();
  // Trunk and all heads.
  std::vector<num::BasicParameter<T>*> critic_parameters();
  // Trunk and raw critic head: the Lipschitz-constrained part.
  std::vector<num::BasicParameter<T>*> clipped_parameters();

  template <typename U>
  BasicModelBundle<U> cast() const {
    BasicModelBundle<U> out;
    out.shape = shape;
    out.seed = seed;
    out.encoder = encoder.template cast<U>();
    out.decoder = decoder.template cast<U>();
    out.trunk = trunk.template cast<U>();
    out.critic_head = critic_head.template cast<U>();
    out.plausibility_head = plausibility_head.template cast<U>();
    if (conditional()) out.attribute_head = attribute_head.template cast<U>();
    return out;
  }

  // ---- inference (graph-free, pure) ----
  Tensor encode(const Tensor& images) const;
  // `attrs` is ignored in non-conditional mode.
  Tensor decode(const Tensor& latent, const Tensor& attrs) const;
  Tensor critic_score(const Tensor& images) const;
  Tensor plausibility(const Tensor& images) const;
  Tensor predict_attributes(const Tensor& images) const;

  // ---- graph forward passes ----
  num::Var encode(num::BasicGraph<T>& g, num::Var images);
  num::Var decode(num::BasicGraph<T>& g, num::Var latent, num::Var attrs);
  num::Var features(num::BasicGraph<T>& g, num::Var images);
};

using ModelBundle = BasicModelBundle<float>;

extern template struct BasicModelBundle<float>;
extern template struct BasicModelBundle<double>;

}  // namespace paretofact::gan
