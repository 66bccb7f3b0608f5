#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "paretofact/common/rng.hpp"
#include "paretofact/num/graph.hpp"
#include "paretofact/num/ops.hpp"

namespace paretofact::gan {

// Activation applied after the last layer. Hidden layers always use
// leaky_relu with the network's slope.
enum class Head { linear, sigmoid, softmax, leaky_relu };

std::string_view head_name(Head head);
Head parse_head(std::string_view name);

template <typename T>
struct BasicDense {
  num::BasicParameter<T> weight;  // [in x out]
  num::BasicParameter<T> bias;    // [out]
};

// Fully connected network. sizes = {in, hidden..., out}.
template <typename T>
class BasicMlp {
 public:
  using Tensor = num::BasicTensor<T>;

  BasicMlp() = default;
  BasicMlp(std::vector<std::size_t> sizes, Head head, double slope = num::kDefaultLeakySlope);

  // Weights uniform in +-1/sqrt(fan_in), biases zero.
  void initialize(Rng& rng);

  num::Var forward(num::BasicGraph<T>& g, num::Var x);
  // Graph-free evaluation of a [batch x in] tensor.
  Tensor infer(const Tensor& x) const;

  std::size_t input_width() const { return sizes_.front(); }
  std::size_t output_width() const { return sizes_.back(); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  Head head() const { return head_; }
  double slope() const { return slope_; }

  std::vector<BasicDense<T>>& layers() { return layers_; }
  const std::vector<BasicDense<T>>& layers() const { return layers_; }

  // Weight then bias for each layer, in order.
  std::vector<num::BasicParameter<T>*> parameters();
  std::vector<const num::BasicParameter<T>*> parameters() const;

  template <typename U>
  BasicMlp<U> cast() const {
    BasicMlp<U> out(sizes_, head_, slope_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      out.layers()[i].weight = num::BasicParameter<U>(layers_[i].weight.value.template cast<U>());
      out.layers()[i].bias = num::BasicParameter<U>(layers_[i].bias.value.template cast<U>());
    }
    return out;
  }

 private:
  std::vector<std::size_t> sizes_;
  Head head_ = Head::linear;
  double slope_ = num::kDefaultLeakySlope;
  std::vector<BasicDense<T>> layers_;
};

using Mlp = BasicMlp<float>;

extern template class BasicMlp<float>;
extern template class BasicMlp<double>;

}  // namespace paretofact::gan
