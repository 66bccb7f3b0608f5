#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "scratch.hpp"
#include "paretofact/cli/commands.hpp"
#include "paretofact/cli/config.hpp"
#include "paretofact/cli/verify.hpp"
#include "paretofact/common/error.hpp"
#include "paretofact/data/blobs.hpp"
#include "paretofact/data/dataset_io.hpp"
#include "paretofact/data/split.hpp"

namespace pf = paretofact;
namespace cli = paretofact::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<double> cells(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  std::string cell;
  std::getline(in, cell, ',');  // row label
  while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

// A pipeline small enough for a unit test.
json tiny(const fs::path& out) {
  return json{{"dataset", {{"n", 200}}},
              {"model", {{"latent", 8}, {"hidden", {32, 16}}}},
              {"training", {{"epochs", 2}}},
              {"target_training", {{"epochs", 3}, {"hidden", {16}}}},
              {"nsga", {{"population", 12}, {"offspring", 12}, {"generations", 3}}},
              {"report", {{"combinations", {json::array({3}), json::array({0, 3}), json::array()}}}},
              {"output_dir", out.string()}};
}

struct Run {
  int status = 0;
  std::string output;
};

Run run_cli(const std::string& args) {
  Run r;
  FILE* pipe = popen((std::string(PARETOFACT_CLI) + " " + args + " 2>&1").c_str(), "r");
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

}  // namespace

TEST(Config, DefaultsAreComplete) {
  const auto c = cli::config_from_json(json::object());
  EXPECT_EQ(c.dataset.n, 2000u);
  EXPECT_EQ(c.nsga.population, 100u);
  EXPECT_EQ(c.nsga.seed, 100u);
  EXPECT_EQ(c.training.epochs, 80u);
  EXPECT_EQ(cli::config_to_json(c), cli::default_config_json());
}

TEST(Config, UnknownKeysAreNamed) {
  try {
    cli::config_from_json(json{{"dataset", {{"foo", 1}}}});
    FAIL();
  } catch (const pf::ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("dataset.foo"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::config_from_json(json{{"nsgaa", json::object()}}), pf::ContractError);
}

TEST(Config, WrongTypesAndInvalidBiasAreNamed) {
  try {
    cli::config_from_json(json{{"nsga", {{"generations", "many"}}}});
    FAIL();
  } catch (const pf::ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("nsga.generations"), std::string::npos) << e.what();
  }
  try {
    cli::config_from_json(json{{"dataset", {{"bias", {{"attribute", 3}, {"class", 1}, {"strength", 1.5}}}}}});
    FAIL();
  } catch (const pf::ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("strength"), std::string::npos) << e.what();
  }
}

TEST(Config, DottedOverrides) {
  json j = json::object();
  cli::apply_override(j, "nsga.generations=7");
  cli::apply_override(j, "objectives.adversarial=targeted");
  cli::apply_override(j, "model.hidden=[8,4]");
  cli::apply_override(j, "objectives.target_class=0");
  const auto c = cli::config_from_json(j);
  EXPECT_EQ(c.nsga.generations, 7u);
  EXPECT_EQ(c.objectives.adv, pf::objectives::AdvMode::targeted);
  EXPECT_EQ(c.model.hidden, (std::vector<std::size_t>{8, 4}));
  EXPECT_EQ(c.target_class, std::optional<std::size_t>(0));
  EXPECT_THROW(cli::apply_override(j, "no-equals-sign"), pf::ContractError);
}

TEST(Config, FileAndRelativePaths) {
  const auto dir = scratch("config");
  std::ofstream(dir / "img.idx") << "x";
  std::ofstream(dir / "lbl.idx") << "x";
  std::ofstream(dir / "c.json") << R"({"output_dir": "out", "dataset": {"source": "idx",
      "idx_images": "img.idx", "idx_labels": "lbl.idx"}})";
  const auto c = cli::load_config(dir / "c.json", {"split.seed=9"});
  EXPECT_EQ(c.output_dir, dir / "out");
  EXPECT_EQ(c.dataset.idx_images, dir / "img.idx");
  EXPECT_EQ(c.split.seed, 9u);
  fs::remove(dir / "lbl.idx");
  try {
    cli::load_config(dir / "c.json");
    FAIL();
  } catch (const pf::Error& e) {
    EXPECT_NE(std::string(e.what()).find("lbl.idx"), std::string::npos) << e.what();
  }
  std::ofstream(dir / "bad.json") << "{";
  EXPECT_THROW(cli::load_config(dir / "bad.json"), pf::Error);
  EXPECT_THROW(cli::load_config(dir / "absent.json"), pf::Error);
}

TEST(Anchor, DrawnFromTheHoldoutOnly) {
  const auto d = pf::data::generate_blobs(1, 100);
  const auto plan = pf::data::make_split(d, {0.4, 0.4, 0.2}, 2);
  const std::set<std::size_t> holdout(plan.target_holdout.begin(), plan.target_holdout.end());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_TRUE(holdout.count(cli::choose_anchor(d, plan, std::nullopt, seed)));
  }
  EXPECT_EQ(cli::choose_anchor(d, plan, plan.target_holdout[3], 0), plan.target_holdout[3]);
  EXPECT_THROW(cli::choose_anchor(d, plan, plan.gan_train[0], 0), pf::ContractError);
  EXPECT_THROW(cli::choose_anchor(d, plan, plan.target_train[0], 0), pf::ContractError);
  EXPECT_THROW(cli::choose_anchor(d, plan, 100, 0), pf::ContractError);
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(scratch("pipeline"));
    for (const char* name : {"a", "b"}) {
      const auto c = cli::config_from_json(tiny(*root_ / name));
      std::ostringstream sink;
      cli::cmd_gen_data(c, sink);
      cli::cmd_train(c, sink);
      cli::cmd_audit(c, sink);
      cli::cmd_report(c, sink);
    }
  }
  static void TearDownTestSuite() { delete root_; }
  static cli::RunPaths paths(const char* name) { return {*root_ / name}; }
  static fs::path* root_;
};
fs::path* Pipeline::root_ = nullptr;

TEST_F(Pipeline, RerunsAreByteIdentical) {
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(paths("a").root)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), paths("a").root);
    EXPECT_EQ(slurp(entry.path()), slurp(paths("b").root / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 15u);
}

TEST_F(Pipeline, ManifestAndMetrics) {
  const auto manifest = json::parse(slurp(paths("a").manifest()));
  std::size_t total = 0;
  for (const auto& c : manifest.at("class_counts")) total += c.get<std::size_t>();
  EXPECT_EQ(total, 200u);
  const auto metrics = json::parse(slurp(paths("a").metrics()));
  const double acc = metrics.at("target").at("holdout_accuracy").get<double>();
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);
  EXPECT_EQ(metrics.at("gan").at("epochs").size(), 2u);
}

TEST_F(Pipeline, AuditOutputsAgree) {
  const auto report = json::parse(slurp(paths("a").audit() / "report.json"));
  const auto rows = lines(slurp(paths("a").audit() / "front.csv"));
  EXPECT_EQ(rows.size(), report.at("members").size() + 1);
  const auto plan = pf::data::split_from_json(json::parse(slurp(paths("a").split())));
  const std::size_t anchor = report.at("anchor").at("index").get<std::size_t>();
  EXPECT_NE(std::find(plan.target_holdout.begin(), plan.target_holdout.end(), anchor), plan.target_holdout.end());
  EXPECT_EQ(report.at("evaluations").get<std::size_t>(), 12u + 3 * 12);
}

TEST_F(Pipeline, ReportMatrices) {
  const auto ssim = lines(slurp(paths("a").analysis() / "ssim.csv"));
  ASSERT_GE(ssim.size(), 2u);
  std::vector<std::vector<double>> m;
  for (std::size_t r = 1; r < ssim.size(); ++r) m.push_back(cells(ssim[r]));
  for (std::size_t i = 0; i < m.size(); ++i) {
    ASSERT_EQ(m[i].size(), m.size());
    EXPECT_NEAR(m[i][i], 1.0, 1e-9);
    for (std::size_t j = 0; j < m.size(); ++j) EXPECT_EQ(m[i][j], m[j][i]);
  }
  EXPECT_EQ(lines(slurp(paths("a").analysis() / "bias.csv")).size(), 3u + 1);
  EXPECT_TRUE(fs::exists(paths("a").analysis() / "luminance.cgmf"));
  EXPECT_TRUE(fs::exists(paths("a").analysis() / "heatmaps.cgmf"));
}

TEST(Commands, MissingInputsNameThePath) {
  const auto dir = scratch("missing");
  const auto c = cli::config_from_json(tiny(dir / "run"));
  std::ostringstream sink;
  try {
    cli::cmd_train(c, sink);
    FAIL();
  } catch (const pf::Error& e) {
    EXPECT_NE(std::string(e.what()).find("dataset.cgmf"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::cmd_report(c, sink), pf::Error);
}

TEST(Verify, InjectedBrokenGradientIsNamed) {
  cli::VerifyOptions o;
  o.networks = 2;
  o.broken_gradient = "critic";
  const auto results = cli::run_checks(o);
  EXPECT_EQ(results.size(), cli::check_names().size());
  for (const auto& r : results) EXPECT_EQ(r.passed, r.name != "gradient/critic") << r.name << ": " << r.detail;
}

TEST(Binary, ExitCodesAndMessages) {
  const auto dir = scratch("binary");
  const auto ok = run_cli("verify");
  EXPECT_EQ(ok.status, 0) << ok.output;
  EXPECT_EQ(ok.output.find("FAIL"), std::string::npos);

  const auto broken = run_cli("verify --set verify.inject_broken_gradient=generator");
  EXPECT_EQ(broken.status, 1);
  EXPECT_NE(broken.output.find("gradient/generator"), std::string::npos) << broken.output;

  std::ofstream(dir / "bad.json") << R"({"dataset": {"bias": {"attribute": 3, "class": 1, "strength": 2}}})";
  const auto bias = run_cli("gen-data --config " + (dir / "bad.json").string() + " --out " + (dir / "x").string());
  EXPECT_EQ(bias.status, 2);
  EXPECT_NE(bias.output.find("strength"), std::string::npos) << bias.output;

  std::ofstream(dir / "c.json") << "{}";
  const auto missing = run_cli("train --config " + (dir / "c.json").string() + " --out " + (dir / "empty").string());
  EXPECT_NE(missing.status, 0);
  EXPECT_NE(missing.output.find((dir / "empty").string()), std::string::npos) << missing.output;

  EXPECT_NE(run_cli("").status, 0);
  EXPECT_NE(run_cli("audit").status, 0);
}

TEST(ShippedFiles, ConfigsLoadAndSchemaCoversEveryKey) {
  const fs::path src = PARETOFACT_SOURCE_DIR;
  EXPECT_EQ(cli::config_to_json(cli::load_config(src / "configs/reference.json")).dump(),
            cli::config_to_json(cli::config_from_json(json::object(), src / "configs")).dump());
  const auto biased = cli::load_config(src / "configs/biased.json");
  ASSERT_TRUE(biased.dataset.bias.has_value());
  EXPECT_EQ(biased.dataset.bias->attribute, 3u);
  EXPECT_TRUE(cli::load_config(src / "configs/erased.json").dataset.augment_erased);

  const auto schema = json::parse(slurp(src / "docs/config.schema.json"));
  const auto defaults = cli::default_config_json();
  std::set<std::string> want, have;
  for (const auto& [section, value] : defaults.items()) {
    want.insert(section);
    if (value.is_object()) {
      for (const auto& [k, v] : value.items()) want.insert(section + "." + k);
    }
  }
  for (const auto& [section, value] : schema.at("properties").items()) {
    have.insert(section);
    if (value.contains("properties")) {
      for (const auto& [k, v] : value.at("properties").items()) have.insert(section + "." + k);
    }
  }
  EXPECT_EQ(have, want);
}
