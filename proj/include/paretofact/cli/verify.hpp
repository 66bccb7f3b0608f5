#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "paretofact/cli/config.hpp"
#include "paretofact/gan/bundle.hpp"
#include "paretofact/gan/losses.hpp"
#include "paretofact/gan/mlp.hpp"
#include "paretofact/num/gradcheck.hpp"

namespace paretofact::cli {

// A small random network set in double precision with one batch, exposing
// every training loss by name.
struct GradientFixture {
  gan::BasicModelBundle<double> conditional;
  gan::BasicModelBundle<double> plain;  // non-conditional
  gan::BasicMlp<double> target;
  gan::BasicBatch<double> batch;
  num::BasicTensor<double> onehot;  // target labels for the batch
  // Generator output fixed at construction: critic losses treat it as data.
  num::BasicTensor<double> conditional_fakes;
  num::BasicTensor<double> plain_fakes;
  gan::LossWeights weights{1.5, 0.7, 1.2};

  // Shapes, widths and values all follow from `seed`.
  static GradientFixture random(std::uint64_t seed);

  static const std::vector<std::string>& loss_names();
  // Parameters the named loss depends on; critic losses exclude the generator.
  num::NamedParameters parameters(std::string_view loss);
  // Records the named loss on `g`.
  num::Var loss(std::string_view name, num::BasicGraph<double>& g);
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  // Name of a check (e.g. "gradient/rec") whose loss gets a deliberately
  // wrong backward pass; used to prove failures are reported.
  std::string broken_gradient;
  std::size_t networks = 10;
  std::uint64_t seed = 2024;
};

std::vector<std::string> check_names();
std::vector<CheckResult> run_checks(const VerifyOptions& options, std::ostream* progress = nullptr);

// Prints one line per check and a summary; returns the exit code.
int cmd_verify(const RunConfig& config, std::ostream& out);

}  // namespace paretofact::cli
