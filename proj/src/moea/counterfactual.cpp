#include "paretofact/moea/counterfactual.hpp"

#include "paretofact/common/error.hpp"

namespace paretofact::moea {

Problem counterfactual_problem(const objectives::AnchorContext& ctx, const gan::ModelBundle& bundle,
                               const gan::TargetModel& target, const objectives::ObjectiveConfig& objectives) {
  Problem p;
  p.dimensions = ctx.attributes.size();
  p.evaluate = [&ctx, &bundle, &target, objectives](std::span<const double> delta) {
    const auto t = objectives::evaluate(ctx, bundle, target, delta, objectives);
    return std::vector<double>{t.f_gan, t.f_adv, t.f_att};
  };
  return p;
}

ParetoFront evolve(const objectives::AnchorContext& ctx, const gan::ModelBundle& bundle,
                   const gan::TargetModel& target, const NsgaConfig& config,
                   const objectives::ObjectiveConfig& objectives, const GenerationObserver& observer) {
  if (ctx.attributes.empty()) throw ContractError("evolve: anchor has no attributes to perturb");
  return evolve(counterfactual_problem(ctx, bundle, target, objectives), config, observer);
}

objectives::ObjectiveTriple triple_of(const Individual& individual) {
  if (individual.objectives.size() != 3) {
    throw DimensionError("triple_of: individual has " + std::to_string(individual.objectives.size()) +
                         " objectives, expected 3");
  }
  return {individual.objectives[0], individual.objectives[1], individual.objectives[2]};
}

}  // namespace paretofact::moea
