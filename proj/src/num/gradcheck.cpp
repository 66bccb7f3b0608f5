#include "paretofact/num/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "paretofact/common/error.hpp"

namespace paretofact::num {

namespace {

double evaluate(const LossBuilder& loss) {
  BasicGraph<double> g;
  const Var v = loss(g);
  if (g.value(v).size() != 1) throw DimensionError("gradcheck: loss must be a scalar");
  return g.value(v)[0];
}

}  // namespace

GradCheckReport gradcheck(const NamedParameters& params, const LossBuilder& loss, double step, double floor,
                          double kink_tolerance) {
  if (!(step > 0) || !(floor > 0)) throw ContractError("gradcheck: step and floor must be positive");
  for (auto& [name, p] : params) p->zero_grad();
  {
    BasicGraph<double> g;
    g.backward(loss(g));
  }
  GradCheckReport report;
  const double f0 = evaluate(loss);
  for (auto& [name, p] : params) {
    auto values = p->value.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double fp = evaluate(loss);
      values[i] = saved - step;
      const double fm = evaluate(loss);
      values[i] = saved;

      const double forward = (fp - f0) / step;
      const double backward = (f0 - fm) / step;
      const double spread = std::max({std::abs(forward), std::abs(backward), floor});
      if (std::abs(forward - backward) > kink_tolerance * spread + 1e-6) {
        ++report.kinks;
        continue;
      }
      const double numeric = (fp - fm) / (2 * step);
      const double analytic = p->grad[i];
      const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      ++report.checked;
      if (err > report.max_relative_error || report.worst.empty()) {
        report.max_relative_error = err;
        report.worst = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return report;
}

}  // namespace paretofact::num
