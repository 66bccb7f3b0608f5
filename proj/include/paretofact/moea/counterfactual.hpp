#pragma once

#include "paretofact/moea/nsga2.hpp"
#include "paretofact/objectives/objectives.hpp"

namespace paretofact::moea {

// Perturbation search for one anchor: decision variables are delta in the
// configured box, objectives the (f_gan, f_adv, f_att) triple.
Problem counterfactual_problem(const objectives::AnchorContext& ctx, const gan::ModelBundle& bundle,
                               const gan::TargetModel& target, const objectives::ObjectiveConfig& objectives);

ParetoFront evolve(const objectives::AnchorContext& ctx, const gan::ModelBundle& bundle,
                   const gan::TargetModel& target, const NsgaConfig& config,
                   const objectives::ObjectiveConfig& objectives = {}, const GenerationObserver& observer = {});

objectives::ObjectiveTriple triple_of(const Individual& individual);

}  // namespace paretofact::moea
