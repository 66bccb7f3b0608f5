#include "paretofact/num/graph.hpp"

#include "paretofact/num/kernels.hpp"

namespace paretofact::num {

template <typename T>
Var BasicGraph<T>::input(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr});
  return Var{nodes_.size() - 1};
}

template <typename T>
Var BasicGraph<T>::parameter(BasicParameter<T>& p) {
  nodes_.push_back(Node{p.value, {}, {}, {}, &p});
  return Var{nodes_.size() - 1};
}

template <typename T>
Var BasicGraph<T>::record(Tensor value, std::vector<Var> parents, BackwardFn backward) {
  Node node{std::move(value), {}, {}, std::move(backward), nullptr};
  node.parents.reserve(parents.size());
  for (Var p : parents) {
    if (p.id >= nodes_.size()) throw ContractError("graph: parent node does not exist");
    node.parents.push_back(p.id);
  }
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

template <typename T>
void BasicGraph<T>::backward(Var loss) {
  if (loss.id >= nodes_.size()) throw ContractError("backward: loss node does not exist");
  if (nodes_[loss.id].value.size() != 1) {
    throw ContractError("backward: loss must be a scalar node, got shape " +
                        shape_string(nodes_[loss.id].value.shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor(n.value.shape());
  nodes_[loss.id].grad[0] = T{1};
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, i);
  }
  const auto& k = kernels::active<T>();
  for (Node& n : nodes_) {
    if (n.param == nullptr) continue;
    if (n.param->grad.shape() != n.value.shape()) n.param->grad = Tensor(n.value.shape());
    k.axpy(T{1}, n.grad.data(), n.param->grad.data(), n.grad.size());
  }
}

template class BasicGraph<float>;
template class BasicGraph<double>;

}  // namespace paretofact::num
