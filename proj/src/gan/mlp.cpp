#include "paretofact/gan/mlp.hpp"

#include <cmath>

#include "paretofact/num/kernels.hpp"

namespace paretofact::gan {

std::string_view head_name(Head head) {
  switch (head) {
    case Head::linear:
      return "linear";
    case Head::sigmoid:
      return "sigmoid";
    case Head::softmax:
      return "softmax";
    case Head::leaky_relu:
      return "leaky_relu";
  }
  return "linear";
}

Head parse_head(std::string_view name) {
  if (name == "linear") return Head::linear;
  if (name == "sigmoid") return Head::sigmoid;
  if (name == "softmax") return Head::softmax;
  if (name == "leaky_relu") return Head::leaky_relu;
  throw ContractError("unknown output head '" + std::string(name) + "'");
}

template <typename T>
BasicMlp<T>::BasicMlp(std::vector<std::size_t> sizes, Head head, double slope)
    : sizes_(std::move(sizes)), head_(head), slope_(slope) {
  if (sizes_.size() < 2) throw ContractError("mlp: needs at least input and output sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw ContractError("mlp: layer sizes must be positive");
  }
  if (head_ == Head::softmax && sizes_.back() < 2) {
    throw ContractError("mlp: softmax head needs at least two outputs");
  }
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    layers_.push_back(BasicDense<T>{
        num::BasicParameter<T>(Tensor(num::Shape{sizes_[i], sizes_[i + 1]})),
        num::BasicParameter<T>(Tensor(num::Shape{sizes_[i + 1]}))});
  }
}

template <typename T>
void BasicMlp<T>::initialize(Rng& rng) {
  for (auto& layer : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.value.shape()[0]));
    for (auto& w : layer.weight.value.values()) w = static_cast<T>(rng.uniform(-bound, bound));
    layer.bias.value.fill(T{0});
    layer.weight.zero_grad();
    layer.bias.zero_grad();
  }
}

template <typename T>
num::Var BasicMlp<T>::forward(num::BasicGraph<T>& g, num::Var x) {
  const auto& xv = g.value(x);
  if (xv.rank() != 2 || xv.shape()[1] != input_width()) {
    throw DimensionError("mlp: input " + num::shape_string(xv.shape()) + " does not match width " +
                         std::to_string(input_width()));
  }
  num::Var h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = num::matmul(g, h, g.parameter(layers_[i].weight));
    h = num::add_bias(g, h, g.parameter(layers_[i].bias));
    const bool last = i + 1 == layers_.size();
    if (!last) {
      h = num::leaky_relu(g, h, slope_);
      continue;
    }
    switch (head_) {
      case Head::linear:
        break;
      case Head::sigmoid:
        h = num::sigmoid(g, h);
        break;
      case Head::softmax:
        h = num::softmax(g, h);
        break;
      case Head::leaky_relu:
        h = num::leaky_relu(g, h, slope_);
        break;
    }
  }
  return h;
}

template <typename T>
num::BasicTensor<T> BasicMlp<T>::infer(const Tensor& x) const {
  if (x.rank() != 2 || x.shape()[1] != input_width()) {
    throw DimensionError("mlp: input " + num::shape_string(x.shape()) + " does not match width " +
                         std::to_string(input_width()));
  }
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Tensor next = num::matmul(h, layers_[i].weight.value);
    const std::size_t m = next.shape()[0], n = next.shape()[1];
    const auto& b = layers_[i].bias.value;
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < n; ++c) next[r * n + c] += b[c];
    }
    const bool last = i + 1 == layers_.size();
    if (!last || head_ == Head::leaky_relu) {
      next = num::elementwise<T>(num::Elementwise::leaky_relu, next, nullptr, slope_);
    } else if (head_ == Head::sigmoid) {
      next = num::elementwise<T>(num::Elementwise::sigmoid, next);
    } else if (head_ == Head::softmax) {
      for (std::size_t r = 0; r < m; ++r) {
        auto row = next.row(r);
        const auto p = num::softmax(std::span<const T>(row.data(), row.size()));
        for (std::size_t c = 0; c < n; ++c) row[c] = static_cast<T>(p[c]);
      }
    }
    h = std::move(next);
  }
  return h;
}

template <typename T>
std::vector<num::BasicParameter<T>*> BasicMlp<T>::parameters() {
  std::vector<num::BasicParameter<T>*> out;
  for (auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

template <typename T>
std::vector<const num::BasicParameter<T>*> BasicMlp<T>::parameters() const {
  std::vector<const num::BasicParameter<T>*> out;
  for (const auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

template class BasicMlp<float>;
template class BasicMlp<double>;

}  // namespace paretofact::gan
