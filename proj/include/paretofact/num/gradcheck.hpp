#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "paretofact/num/graph.hpp"

namespace paretofact::num {

using NamedParameters = std::vector<std::pair<std::string, BasicParameter<double>*>>;
// Records the scalar loss on a fresh graph, binding the parameters itself.
using LossBuilder = std::function<Var(BasicGraph<double>&)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst;          // "param[index]" of the largest error
  std::size_t checked = 0;
  std::size_t kinks = 0;      // entries skipped because the step crossed a kink
};

// Central differences against backward() for every entry of every
// parameter. Relative error is |a - n| / max(|a|, |n|, floor). An entry
// whose forward and backward one-sided differences disagree by more than
// `kink_tolerance` (relative) sits on a non-differentiable point and is
// counted in `kinks` instead of being compared.
GradCheckReport gradcheck(const NamedParameters& params, const LossBuilder& loss, double step = 1e-5,
                          double floor = 1e-6, double kink_tolerance = 1e-2);

}  // namespace paretofact::num
