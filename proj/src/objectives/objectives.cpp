#include "paretofact/objectives/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "paretofact/analysis/metrics.hpp"
#include "paretofact/common/error.hpp"
#include "paretofact/num/ops.hpp"

namespace paretofact::objectives {

std::string_view adv_mode_name(AdvMode mode) {
  return mode == AdvMode::untargeted ? "untargeted" : "targeted";
}

AdvMode parse_adv_mode(std::string_view name) {
  if (name == "untargeted") return AdvMode::untargeted;
  if (name == "targeted") return AdvMode::targeted;
  throw ContractError("unknown adversarial mode '" + std::string(name) + "' (expected untargeted|targeted)");
}

std::string_view att_mode_name(AttMode mode) { return mode == AttMode::norm ? "norm" : "ssim"; }

AttMode parse_att_mode(std::string_view name) {
  if (name == "norm") return AttMode::norm;
  if (name == "ssim") return AttMode::ssim;
  throw ContractError("unknown intensity mode '" + std::string(name) + "' (expected norm|ssim)");
}

AnchorContext AnchorContext::make(const gan::ModelBundle& bundle, const gan::TargetModel& target,
                                  std::span<const float> image, std::span<const float> attributes,
                                  std::optional<std::size_t> target_class) {
  const std::size_t p = bundle.shape.image_size();
  if (image.size() != p) {
    throw DimensionError("anchor image has " + std::to_string(image.size()) + " values, bundle expects " +
                         std::to_string(p));
  }
  if (bundle.conditional() && attributes.size() != bundle.shape.attributes) {
    throw DimensionError("anchor has " + std::to_string(attributes.size()) + " attributes, bundle expects " +
                         std::to_string(bundle.shape.attributes));
  }
  AnchorContext ctx;
  ctx.image = num::Tensor(num::Shape{1, p}, std::vector<float>(image.begin(), image.end()));
  ctx.attributes.assign(attributes.begin(), attributes.end());
  ctx.anchor_class = target.predict(image);
  if (target_class) {
    if (*target_class >= target.class_count()) {
      throw ContractError("target class " + std::to_string(*target_class) + " outside [0," +
                          std::to_string(target.class_count()) + ")");
    }
    if (*target_class == ctx.anchor_class) {
      throw ContractError("target class " + std::to_string(*target_class) + " equals the anchor's predicted class");
    }
  }
  ctx.target_class = target_class;
  ctx.anchor_plausibility = bundle.plausibility(ctx.image)[0];
  ctx.anchor_critic = bundle.critic_score(ctx.image)[0];
  ctx.latent = bundle.encode(ctx.image);
  const auto& s = bundle.shape.image_shape;
  ctx.height = s.size() > 0 ? s[0] : p;
  ctx.width = s.size() > 1 ? s[1] : 1;
  ctx.channels = s.size() > 2 ? s[2] : 1;
  return ctx;
}

gan::AttributeVector perturbed_attributes(const AnchorContext& ctx, std::span<const double> delta) {
  if (delta.size() != ctx.attributes.size()) {
    throw DimensionError("perturbation has " + std::to_string(delta.size()) + " components, anchor has " +
                         std::to_string(ctx.attributes.size()) + " attributes");
  }
  gan::AttributeVector b(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    b[i] = static_cast<float>(std::clamp(static_cast<double>(ctx.attributes[i]) + delta[i], 0.0, 1.0));
  }
  return b;
}

num::Tensor render(const AnchorContext& ctx, const gan::ModelBundle& bundle, std::span<const double> delta) {
  const auto b = perturbed_attributes(ctx, delta);
  const num::Tensor attrs(num::Shape{1, std::max<std::size_t>(b.size(), 1)},
                          b.empty() ? std::vector<float>{0.0f} : b);
  return bundle.decode(ctx.latent, attrs);
}

double eval_f_gan(const AnchorContext& ctx, const gan::ModelBundle& bundle, const num::Tensor& image) {
  return ctx.anchor_plausibility - static_cast<double>(bundle.plausibility(image)[0]);
}

double eval_f_adv(const AnchorContext& ctx, std::span<const double> proba, AdvMode mode) {
  std::vector<double> onehot(proba.size(), 0.0);
  if (mode == AdvMode::untargeted) {
    onehot.at(ctx.anchor_class) = 1.0;
    return -num::cross_entropy(onehot, proba);
  }
  if (!ctx.target_class) throw ContractError("targeted mode requires a target class");
  onehot.at(*ctx.target_class) = 1.0;
  return num::cross_entropy(onehot, proba);
}

double eval_f_adv(const AnchorContext& ctx, const gan::TargetModel& target, const num::Tensor& image,
                  AdvMode mode) {
  return eval_f_adv(ctx, target.predict_proba(image.values()), mode);
}

double eval_f_att(std::span<const double> delta) { return num::norm_l2(delta); }

double eval_f_att_ssim(const AnchorContext& ctx, const num::Tensor& image) {
  // Identical images give exactly 1, so clamp away rounding below zero.
  const double s = analysis::ssim_image(ctx.image.values(), image.values(), ctx.height, ctx.width, ctx.channels);
  return std::max(0.0, 1.0 - s);
}

Evaluation evaluate_full(const AnchorContext& ctx, const gan::ModelBundle& bundle, const gan::TargetModel& target,
                         std::span<const double> delta, const ObjectiveConfig& config) {
  Evaluation e;
  e.image = render(ctx, bundle, delta);
  e.proba = target.predict_proba(e.image.values());
  e.predicted_class = static_cast<std::size_t>(std::max_element(e.proba.begin(), e.proba.end()) - e.proba.begin());
  e.triple.f_gan = eval_f_gan(ctx, bundle, e.image);
  e.triple.f_adv = eval_f_adv(ctx, e.proba, config.adv);
  e.triple.f_att = config.att == AttMode::norm ? eval_f_att(delta) : eval_f_att_ssim(ctx, e.image);
  e.critic_gap = ctx.anchor_critic - static_cast<double>(bundle.critic_score(e.image)[0]);
  return e;
}

ObjectiveTriple evaluate(const AnchorContext& ctx, const gan::ModelBundle& bundle, const gan::TargetModel& target,
                         std::span<const double> delta, const ObjectiveConfig& config) {
  return evaluate_full(ctx, bundle, target, delta, config).triple;
}

DisplayTriple display_transform(const ObjectiveTriple& t) {
  DisplayTriple d;
  d.plausibility = 1.0 - t.f_gan;
  d.power = 1.0 - t.f_adv;
  d.intensity = t.f_att;
  d.plausible = d.plausibility >= kPlausibleThreshold;
  return d;
}

}  // namespace paretofact::objectives
