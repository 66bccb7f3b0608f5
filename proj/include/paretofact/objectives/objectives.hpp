#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "paretofact/gan/bundle.hpp"
#include "paretofact/gan/losses.hpp"
#include "paretofact/gan/target.hpp"

namespace paretofact::objectives {

// Perturbations live in [-kBoxBound, kBoxBound]^N; b = clamp(a + delta, 0, 1).
inline constexpr double kBoxBound = 1.0;
inline constexpr double kPlausibleThreshold = 0.5;

using Perturbation = std::vector<double>;

enum class AdvMode { untargeted, targeted };
enum class AttMode { norm, ssim };

std::string_view adv_mode_name(AdvMode mode);
AdvMode parse_adv_mode(std::string_view name);
std::string_view att_mode_name(AttMode mode);
AttMode parse_att_mode(std::string_view name);

struct ObjectiveConfig {
  AdvMode adv = AdvMode::untargeted;
  AttMode att = AttMode::norm;
};

// Everything about the anchor the objectives need, computed once.
struct AnchorContext {
  num::Tensor image;  // [1 x P]
  gan::AttributeVector attributes;
  std::size_t anchor_class = 0;
  std::optional<std::size_t> target_class;
  double anchor_plausibility = 0.0;
  double anchor_critic = 0.0;
  num::Tensor latent;  // encode(image), [1 x latent]
  std::size_t height = 0, width = 0, channels = 0;

  // Throws DimensionError on size mismatches and ContractError when
  // target_class equals the anchor class or is out of range.
  static AnchorContext make(const gan::ModelBundle& bundle, const gan::TargetModel& target,
                            std::span<const float> image, std::span<const float> attributes,
                            std::optional<std::size_t> target_class = std::nullopt);
};

struct ObjectiveTriple {
  double f_gan = 0.0;
  double f_adv = 0.0;
  double f_att = 0.0;

  std::array<double, 3> values() const { return {f_gan, f_adv, f_att}; }
  bool operator==(const ObjectiveTriple&) const = default;
};

struct DisplayTriple {
  double plausibility = 0.0;  // 1 - f_gan
  double power = 0.0;         // 1 - f_adv
  double intensity = 0.0;     // f_att
  bool plausible = false;     // plausibility >= 0.5
};

// b = clamp(a + delta, 0, 1) as floats.
gan::AttributeVector perturbed_attributes(const AnchorContext& ctx, std::span<const double> delta);

// decode(encode(anchor), b); [1 x P].
num::Tensor render(const AnchorContext& ctx, const gan::ModelBundle& bundle, std::span<const double> delta);

double eval_f_gan(const AnchorContext& ctx, const gan::ModelBundle& bundle, const num::Tensor& image);
double eval_f_adv(const AnchorContext& ctx, std::span<const double> proba, AdvMode mode);
double eval_f_adv(const AnchorContext& ctx, const gan::TargetModel& target, const num::Tensor& image,
                  AdvMode mode);
double eval_f_att(std::span<const double> delta);
double eval_f_att_ssim(const AnchorContext& ctx, const num::Tensor& image);

// Full evaluation of one candidate, with the by-products reports need.
struct Evaluation {
  ObjectiveTriple triple;
  num::Tensor image;  // counterfactual, [1 x P]
  std::vector<double> proba;
  std::size_t predicted_class = 0;
  double critic_gap = 0.0;  // raw critic(anchor) - critic(counterfactual), logged only
};

Evaluation evaluate_full(const AnchorContext& ctx, const gan::ModelBundle& bundle,
                         const gan::TargetModel& target, std::span<const double> delta,
                         const ObjectiveConfig& config = {});
ObjectiveTriple evaluate(const AnchorContext& ctx, const gan::ModelBundle& bundle,
                         const gan::TargetModel& target, std::span<const double> delta,
                         const ObjectiveConfig& config = {});

DisplayTriple display_transform(const ObjectiveTriple& triple);

}  // namespace paretofact::objectives
