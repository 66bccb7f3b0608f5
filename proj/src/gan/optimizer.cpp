#include "paretofact/gan/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace paretofact::gan {

void Sgd::step(const std::vector<num::Parameter*>& params) {
  if (velocity_.empty()) {
    for (const auto* p : params) velocity_.emplace_back(p->value.shape());
  }
  if (velocity_.size() != params.size()) {
    throw ContractError("sgd: parameter list changed between steps");
  }
  const float mu = static_cast<float>(momentum_);
  const float lr = static_cast<float>(lr_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& v = velocity_[i];
    auto& w = params[i]->value;
    const auto& g = params[i]->grad;
    for (std::size_t j = 0; j < w.size(); ++j) {
      v[j] = mu * v[j] + g[j];
      w[j] -= lr * v[j];
    }
  }
}

void zero_grads(const std::vector<num::Parameter*>& params) {
  for (auto* p : params) p->zero_grad();
}

void clip_values(const std::vector<num::Parameter*>& params, double c) {
  const float lim = static_cast<float>(c);
  for (auto* p : params) {
    for (auto& v : p->value.values()) v = std::clamp(v, -lim, lim);
  }
}

double clip_grad_norm(const std::vector<num::Parameter*>& params, double max_norm) {
  double sq = 0.0;
  for (const auto* p : params) {
    for (float g : p->grad.values()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const float k = static_cast<float>(max_norm / norm);
    for (auto* p : params) {
      for (auto& g : p->grad.values()) g *= k;
    }
  }
  return norm;
}

}  // namespace paretofact::gan
