// paretofact <gen-data|train|audit|report|verify> --config <path>
//            [--set key=value]... [--anchor <index>] [--out <dir>]

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paretofact/cli/commands.hpp"
#include "paretofact/cli/config.hpp"
#include "paretofact/cli/verify.hpp"
#include "paretofact/common/error.hpp"

namespace pf = paretofact;

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective counterfactual auditing of image classifiers"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::size_t> anchor;
  std::string out_dir;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "JSON run configuration");
    if (config_required) opt->required();
    sub->add_option("--set", overrides, "override a config key, e.g. --set nsga.seed=3")->allow_extra_args(false);
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
  };
  auto* gen = app.add_subcommand("gen-data", "generate or import the annotated dataset");
  auto* train = app.add_subcommand("train", "train the GAN bundle and the target model");
  auto* audit = app.add_subcommand("audit", "search counterfactuals for one holdout anchor");
  auto* report = app.add_subcommand("report", "luminance, bias and similarity analyses of an audit");
  auto* verify = app.add_subcommand("verify", "run the built-in invariant checks");
  for (auto* sub : {gen, train, audit, report}) add_common(sub, true);
  add_common(verify, false);
  audit->add_option("--anchor", anchor, "dataset index of the anchor (must be in the holdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json base = nlohmann::json::object();
    pf::cli::RunConfig config;
    if (config_path.empty()) {
      for (const auto& o : overrides) pf::cli::apply_override(base, o);
      config = pf::cli::config_from_json(base);
    } else {
      config = pf::cli::load_config(config_path, overrides);
    }
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (anchor) config.audit.anchor = anchor;

    if (gen->parsed()) pf::cli::cmd_gen_data(config, std::cout);
    if (train->parsed()) pf::cli::cmd_train(config, std::cout);
    if (audit->parsed()) pf::cli::cmd_audit(config, std::cout);
    if (report->parsed()) pf::cli::cmd_report(config, std::cout);
    if (verify->parsed()) return pf::cli::cmd_verify(config, std::cout);
  } catch (const pf::LeakageError& e) {
    std::fprintf(stderr, "paretofact: leakage: %s\n", e.what());
    return 3;
  } catch (const pf::Error& e) {
    std::fprintf(stderr, "paretofact: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "paretofact: unexpected error: %s\n", e.what());
    return 2;
  }
  return 0;
}
