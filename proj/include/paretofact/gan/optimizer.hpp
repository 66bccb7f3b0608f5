#pragma once

#include <vector>

#include "paretofact/num/graph.hpp"

namespace paretofact::gan {

// Stochastic gradient descent with heavy-ball momentum:
//   v <- momentum * v + grad;  w <- w - lr * v
// Velocity slots follow the order of the parameter list given to step(),
// which must stay the same across calls.
class Sgd {
 public:
  Sgd(double learning_rate, double momentum) : lr_(learning_rate), momentum_(momentum) {}

  void step(const std::vector<num::Parameter*>& params);

 private:
  double lr_;
  double momentum_;
  std::vector<num::Tensor> velocity_;
};

void zero_grads(const std::vector<num::Parameter*>& params);
// Clamps every value into [-c, c].
void clip_values(const std::vector<num::Parameter*>& params, double c);
// Rescales all gradients together so their joint L2 norm is at most
// max_norm. Returns the norm before rescaling.
double clip_grad_norm(const std::vector<num::Parameter*>& params, double max_norm);

}  // namespace paretofact::gan
