#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "paretofact/num/tensor.hpp"

namespace paretofact::num {

// Trainable tensor. `grad` accumulates across backward passes until cleared.
template <typename T>
struct BasicParameter {
  BasicTensor<T> value;
  BasicTensor<T> grad;

  BasicParameter() = default;
  explicit BasicParameter(BasicTensor<T> v) : value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(T{0}); }
};

using Parameter = BasicParameter<float>;

// Handle to a node of a graph.
struct Var {
  std::size_t id = 0;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so the node
// vector is already topologically sorted and backward walks it once in
// reverse. One graph belongs to one forward/backward pass on one thread.
template <typename T>
class BasicGraph {
 public:
  using Tensor = BasicTensor<T>;
  // Propagates grad(self) into the grads of the node's parents.
  using BackwardFn = std::function<void(BasicGraph&, std::size_t self)>;

  // Leaf that receives a gradient but belongs to no parameter.
  Var input(Tensor value);
  // Leaf bound to `p`; backward adds its gradient into p.grad. A parameter
  // bound twice in one graph gets the sum of both contributions.
  Var parameter(BasicParameter<T>& p);
  // Interior node. `backward` may be empty for nodes with no differentiable
  // parents.
  Var record(Tensor value, std::vector<Var> parents, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  // Valid after backward(); nodes with no path to the loss hold zeros.
  const Tensor& grad(Var v) const { return nodes_.at(v.id).grad; }
  Tensor& grad_mut(std::size_t id) { return nodes_.at(id).grad; }
  const std::vector<std::size_t>& parents(Var v) const { return nodes_.at(v.id).parents; }

  std::size_t size() const noexcept { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must hold one element.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    BasicParameter<T>* param = nullptr;
  };

  std::vector<Node> nodes_;
};

using Graph = BasicGraph<float>;

extern template class BasicGraph<float>;
extern template class BasicGraph<double>;

}  // namespace paretofact::num
