#include "paretofact/cli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "paretofact/analysis/metrics.hpp"
#include "paretofact/common/error.hpp"
#include "paretofact/common/rng.hpp"
#include "paretofact/moea/nsga2.hpp"
#include "paretofact/num/kernels.hpp"
#include "paretofact/num/ops.hpp"

namespace paretofact::cli {

namespace {

using DTensor = num::BasicTensor<double>;

DTensor uniform_tensor(Rng& rng, std::size_t rows, std::size_t cols) {
  DTensor t(num::Shape{rows, cols});
  for (double& v : t.values()) v = rng.uniform();
  return t;
}

template <typename Net>
void jitter_biases(Net& net, Rng& rng) {
  for (auto& layer : net.layers()) {
    for (double& b : layer.bias.value.values()) b = rng.uniform(-0.1, 0.1);
  }
}

void jitter_bundle(gan::BasicModelBundle<double>& b, Rng& rng) {
  jitter_biases(b.encoder, rng);
  jitter_biases(b.decoder, rng);
  jitter_biases(b.trunk, rng);
  jitter_biases(b.critic_head, rng);
  jitter_biases(b.plausibility_head, rng);
  if (b.conditional()) jitter_biases(b.attribute_head, rng);
}

num::NamedParameters named(gan::BasicModelBundle<double>& b) {
  num::NamedParameters out;
  for (auto& [name, p] : b.named_parameters()) out.emplace_back(name, p);
  return out;
}

// Doubles the value but passes the incoming gradient through unscaled.
num::Var broken_double(num::BasicGraph<double>& g, num::Var x) {
  DTensor v = g.value(x);
  for (double& e : v.values()) e *= 2;
  return g.record(std::move(v), {x}, [](num::BasicGraph<double>& graph, std::size_t self) {
    const auto& up = graph.grad(num::Var{self});
    const std::size_t parent = graph.parents(num::Var{self}).front();
    auto& down = graph.grad_mut(parent);
    for (std::size_t i = 0; i < up.size(); ++i) down[i] += up[i];
  });
}

// Stratification by repeated removal of the non-dominated remainder.
std::vector<std::vector<std::size_t>> peel_fronts(const std::vector<std::vector<double>>& pts) {
  std::vector<bool> taken(pts.size(), false);
  std::vector<std::vector<std::size_t>> fronts;
  std::size_t left = pts.size();
  while (left > 0) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (taken[i]) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
        if (taken[j] || j == i) continue;
        bool no_worse = true, better = false;
        for (std::size_t k = 0; k < pts[i].size(); ++k) {
          no_worse = no_worse && pts[j][k] <= pts[i][k];
          better = better || pts[j][k] < pts[i][k];
        }
        dominated = no_worse && better;
      }
      if (!dominated) front.push_back(i);
    }
    for (std::size_t i : front) taken[i] = true;
    left -= front.size();
    fronts.push_back(std::move(front));
  }
  return fronts;
}

CheckResult gradient_check(const std::string& loss, const VerifyOptions& o) {
  const std::string name = "gradient/" + loss;
  const bool broken = o.broken_gradient == name || o.broken_gradient == loss;
  double worst = 0;
  std::string where;
  std::size_t checked = 0, kinks = 0;
  for (std::size_t k = 0; k < o.networks; ++k) {
    GradientFixture fx = GradientFixture::random(o.seed + k);
    auto builder = [&](num::BasicGraph<double>& g) {
      const num::Var v = fx.loss(loss, g);
      return broken ? broken_double(g, v) : v;
    };
    const auto r = num::gradcheck(fx.parameters(loss), builder);
    checked += r.checked;
    kinks += r.kinks;
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      where = fmt::format("network {} {}", k, r.worst);
    }
  }
  const bool ok = worst < 1e-3 && kinks * 100 <= checked + kinks;
  return {name, ok,
          fmt::format("max relative error {:.3g} at {} over {} entries ({} kink skips)", worst, where, checked, kinks)};
}

CheckResult dominance_check(const VerifyOptions& o) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(o.seed * 1000 + s);
    std::vector<std::vector<double>> pts(200, std::vector<double>(3));
    for (auto& p : pts) {
      for (double& v : p) v = s % 2 ? rng.uniform() : static_cast<double>(rng.below(6));
    }
    if (moea::fast_non_dominated_sort(pts) != peel_fronts(pts)) {
      return {"moea/dominance_oracle", false, fmt::format("mismatch on point set {}", s)};
    }
  }
  return {"moea/dominance_oracle", true, "20 sets of 200 points match pairwise stratification"};
}

CheckResult sbx_check(const VerifyOptions& o) {
  Rng rng(o.seed + 11);
  constexpr std::size_t kTrials = 10000, kDims = 5;
  std::vector<double> drift(kDims, 0.0);
  for (std::size_t t = 0; t < kTrials; ++t) {
    std::vector<double> p1(kDims), p2(kDims);
    for (std::size_t i = 0; i < kDims; ++i) {
      p1[i] = rng.uniform(-0.5, 0.5);
      p2[i] = rng.uniform(-0.5, 0.5);
    }
    const auto [c1, c2] = moea::sbx_crossover(p1, p2, 20.0, rng);
    for (std::size_t i = 0; i < kDims; ++i) drift[i] += (c1[i] + c2[i] - p1[i] - p2[i]) / 2;
  }
  double worst = 0;
  for (double d : drift) worst = std::max(worst, std::abs(d) / kTrials);
  return {"moea/sbx_mean", worst <= 0.01, fmt::format("largest child-parent mean gap {:.3g}", worst)};
}

CheckResult mutation_check(const VerifyOptions& o) {
  Rng rng(o.seed + 12);
  constexpr std::size_t kTrials = 10000, kDims = 5;
  const double p = 1.0 / kDims;
  std::vector<std::size_t> fired(kDims, 0);
  const std::vector<double> y(kDims, 0.0);
  for (std::size_t t = 0; t < kTrials; ++t) {
    std::vector<bool> f;
    moea::polynomial_mutation(y, p, 20.0, rng, -1.0, 1.0, &f);
    for (std::size_t i = 0; i < kDims; ++i) fired[i] += f[i];
  }
  const double se = std::sqrt(p * (1 - p) / kTrials);
  double worst = 0;
  for (std::size_t c : fired) worst = std::max(worst, std::abs(static_cast<double>(c) / kTrials - p) / se);
  return {"moea/mutation_rate", worst <= 3.0, fmt::format("largest deviation {:.2f} standard errors", worst)};
}

CheckResult evaluation_count_check(const VerifyOptions& o) {
  moea::Problem problem{2, [](std::span<const double> x) {
                          return std::vector<double>{x[0] * x[0], (x[0] - 1) * (x[0] - 1) + x[1] * x[1]};
                        }};
  moea::NsgaConfig cfg;
  cfg.population = 20;
  cfg.offspring = 20;
  cfg.generations = 5;
  cfg.seed = o.seed;
  const auto front = moea::evolve(problem, cfg);
  const bool ok = front.evaluations == 120 && !front.members.empty();
  return {"moea/evaluation_count", ok, fmt::format("{} evaluations for 20 + 5 x 20", front.evaluations)};
}

CheckResult luminance_check() {
  const double white = analysis::luminance(255, 255, 255);
  const double red = analysis::luminance(255, 0, 0);
  const double black = analysis::luminance(0, 0, 0);
  const bool ok = std::abs(white - 1.0) < 1e-12 && std::abs(red - 0.2126) < 1e-12 && black == 0.0;
  return {"analysis/luminance", ok, fmt::format("white {} red {} black {}", white, red, black)};
}

CheckResult similarity_check(const VerifyOptions& o) {
  Rng rng(o.seed + 13);
  double worst_self = 0, worst_sym = 0;
  bool diff_zero = true;
  for (int t = 0; t < 20; ++t) {
    std::vector<float> x(16 * 16 * 3), y(x.size());
    for (float& v : x) v = static_cast<float>(rng.uniform());
    for (float& v : y) v = static_cast<float>(rng.uniform());
    worst_self = std::max(worst_self, std::abs(analysis::ssim_image(x, x, 16, 16, 3) - 1.0));
    worst_sym = std::max(worst_sym, std::abs(analysis::ssim_image(x, y, 16, 16, 3) - analysis::ssim_image(y, x, 16, 16, 3)));
    const num::Tensor heat = analysis::diff_heatmap(x, x, 16, 16, 3);
    for (float h : heat.values()) diff_zero = diff_zero && h == 0.0f;
  }
  const bool ok = worst_self <= 1e-9 && worst_sym <= 1e-9 && diff_zero;
  return {"analysis/similarity_identities", ok,
          fmt::format("|ssim(x,x)-1| {:.2g}, asymmetry {:.2g}, diff(x,x) {}", worst_self, worst_sym,
                      diff_zero ? "zero" : "nonzero")};
}

CheckResult simd_check(const VerifyOptions& o) {
  using num::kernels::Isa;
  if (num::kernels::detected_isa() == Isa::scalar) {
    return {"num/simd_equivalence", true, "no AVX2 on this machine, scalar kernels only"};
  }
  const auto& ref = num::kernels::table<float>(Isa::scalar);
  const auto& simd = num::kernels::table<float>(Isa::avx2);
  Rng rng(o.seed + 14);
  double worst = 0;
  for (int t = 0; t < 30; ++t) {
    const std::size_t m = 1 + rng.below(9), k = 1 + rng.below(40), n = 1 + rng.below(40);
    std::vector<float> a(m * k), b(k * n), g(m * n);
    for (float& v : a) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : b) v = static_cast<float>(rng.uniform(-1, 1));
    for (float& v : g) v = static_cast<float>(rng.uniform(-1, 1));
    auto compare = [&](const std::vector<float>& x, const std::vector<float>& y) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, std::abs(double(x[i]) - double(y[i])) / std::max(1.0, std::abs(double(x[i]))));
      }
    };
    std::vector<float> c1(m * n), c2(m * n);
    ref.gemm(a.data(), b.data(), c1.data(), m, k, n);
    simd.gemm(a.data(), b.data(), c2.data(), m, k, n);
    compare(c1, c2);
    std::vector<float> t1(k * n, 0.5f), t2 = t1;
    ref.gemm_tn_acc(a.data(), g.data(), t1.data(), m, k, n);
    simd.gemm_tn_acc(a.data(), g.data(), t2.data(), m, k, n);
    compare(t1, t2);
    std::vector<float> u1(m * k, 0.5f), u2 = u1;
    ref.gemm_nt_acc(g.data(), b.data(), u1.data(), m, k, n);
    simd.gemm_nt_acc(g.data(), b.data(), u2.data(), m, k, n);
    compare(u1, u2);
    std::vector<float> y1 = b, y2 = b;
    ref.axpy(0.3f, g.data(), y1.data(), std::min(g.size(), b.size()));
    simd.axpy(0.3f, g.data(), y2.data(), std::min(g.size(), b.size()));
    compare(y1, y2);
    const double s1 = ref.abs_diff_sum(a.data(), g.data(), std::min(a.size(), g.size()));
    const double s2 = simd.abs_diff_sum(a.data(), g.data(), std::min(a.size(), g.size()));
    worst = std::max(worst, std::abs(s1 - s2) / std::max(1.0, s1));
  }
  return {"num/simd_equivalence", worst <= 1e-5, fmt::format("largest relative gap {:.3g}", worst)};
}

}  // namespace

GradientFixture GradientFixture::random(std::uint64_t seed) {
  Rng rng(seed);
  gan::BundleShape shape;
  const std::size_t side = 2 + rng.below(2);
  const std::size_t channels = rng.bernoulli(0.5) ? 3 : 1;
  shape.image_shape = {side, side, channels};
  shape.latent = 2 + rng.below(3);
  shape.attributes = 1 + rng.below(3);
  shape.hidden.clear();
  const std::size_t layers = 1 + rng.below(2);
  for (std::size_t l = 0; l < layers; ++l) shape.hidden.push_back(3 + rng.below(4));

  GradientFixture fx;
  shape.mode = gan::Mode::conditional;
  fx.conditional = gan::ModelBundle::create(shape, rng.below(1u << 30)).cast<double>();
  shape.mode = gan::Mode::non_conditional;
  fx.plain = gan::ModelBundle::create(shape, rng.below(1u << 30)).cast<double>();
  jitter_bundle(fx.conditional, rng);
  jitter_bundle(fx.plain, rng);

  const std::size_t pixels = side * side * channels;
  const std::size_t classes = 2 + rng.below(2);
  fx.target = gan::BasicMlp<double>({pixels, 3 + rng.below(4), classes}, gan::Head::softmax);
  fx.target.initialize(rng);
  jitter_biases(fx.target, rng);

  constexpr std::size_t kBatch = 3;
  fx.batch.images = uniform_tensor(rng, kBatch, pixels);
  fx.batch.attributes = uniform_tensor(rng, kBatch, shape.attributes);
  fx.batch.sampled = uniform_tensor(rng, kBatch, shape.attributes);
  fx.onehot = DTensor(num::Shape{kBatch, classes});
  for (std::size_t r = 0; r < kBatch; ++r) fx.onehot.at(r, rng.below(classes)) = 1.0;
  fx.conditional_fakes = gan::generate_fakes(fx.conditional, fx.batch);
  fx.plain_fakes = gan::generate_fakes(fx.plain, fx.batch);
  return fx;
}

const std::vector<std::string>& GradientFixture::loss_names() {
  static const std::vector<std::string> names{"rec",    "att_g",        "adv_g",  "generator",    "adv_d",    "att_c",
                                              "critic", "plausibility", "generator_nc", "critic_nc", "target_ce"};
  return names;
}

num::NamedParameters GradientFixture::parameters(std::string_view loss) {
  if (loss == "target_ce") {
    num::NamedParameters out;
    const auto params = target.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) out.emplace_back("target." + std::to_string(i), params[i]);
    return out;
  }
  const bool critic = loss == "adv_d" || loss == "att_c" || loss == "critic" || loss == "plausibility" ||
                      loss == "critic_nc";
  auto& bundle = loss.ends_with("_nc") ? plain : conditional;
  if (!critic) return named(bundle);
  num::NamedParameters out;
  for (auto& [name, p] : bundle.named_parameters()) {
    if (!name.starts_with("encoder") && !name.starts_with("decoder")) out.emplace_back(name, p);
  }
  return out;
}

num::Var GradientFixture::loss(std::string_view name, num::BasicGraph<double>& g) {
  if (name == "target_ce") return num::cross_entropy(g, onehot, target.forward(g, g.input(batch.images)));
  if (name == "generator_nc") return gan::loss_generator(g, plain, batch, weights).total;
  if (name == "critic_nc") {
    return gan::loss_discriminator_classifier(g, plain, batch, weights, g.input(plain_fakes)).total;
  }
  if (name == "rec" || name == "att_g" || name == "adv_g" || name == "generator") {
    const auto t = gan::loss_generator(g, conditional, batch, weights);
    return name == "rec" ? t.rec : name == "att_g" ? t.att : name == "adv_g" ? t.adv : t.total;
  }
  if (name == "adv_d" || name == "att_c" || name == "critic" || name == "plausibility") {
    const auto t = gan::loss_discriminator_classifier(g, conditional, batch, weights,
                                                      g.input(conditional_fakes));
    return name == "adv_d" ? t.adv : name == "att_c" ? t.att : name == "critic" ? t.total : t.plausibility;
  }
  throw ContractError("unknown loss '" + std::string(name) + "'");
}

std::vector<std::string> check_names() {
  std::vector<std::string> names;
  for (const auto& l : GradientFixture::loss_names()) names.push_back("gradient/" + l);
  for (const char* n : {"moea/dominance_oracle", "moea/sbx_mean", "moea/mutation_rate", "moea/evaluation_count",
                        "analysis/luminance", "analysis/similarity_identities", "num/simd_equivalence"}) {
    names.emplace_back(n);
  }
  return names;
}

std::vector<CheckResult> run_checks(const VerifyOptions& options, std::ostream* progress) {
  if (!options.broken_gradient.empty()) {
    const auto& losses = GradientFixture::loss_names();
    const bool known = std::any_of(losses.begin(), losses.end(), [&](const std::string& l) {
      return options.broken_gradient == l || options.broken_gradient == "gradient/" + l;
    });
    if (!known) throw ContractError("verify.inject_broken_gradient names no gradient check: '" + options.broken_gradient + "'");
  }
  std::vector<CheckResult> out;
  auto add = [&](CheckResult r) {
    if (progress) *progress << fmt::format("{} {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
    out.push_back(std::move(r));
  };
  for (const auto& l : GradientFixture::loss_names()) add(gradient_check(l, options));
  add(dominance_check(options));
  add(sbx_check(options));
  add(mutation_check(options));
  add(evaluation_count_check(options));
  add(luminance_check());
  add(similarity_check(options));
  add(simd_check(options));
  return out;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
  VerifyOptions options;
  options.broken_gradient = config.inject_broken_gradient;
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_checks(options, &out);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<std::string> failed;
  for (const auto& r : results) {
    if (!r.passed) failed.push_back(r.name);
  }
  out << fmt::format("{} of {} checks passed in {:.1f} s\n", results.size() - failed.size(), results.size(), seconds);
  if (!failed.empty()) {
    out << "failed:";
    for (const auto& f : failed) out << " " << f;
    out << "\n";
    return 1;
  }
  return 0;
}

}  // namespace paretofact::cli
