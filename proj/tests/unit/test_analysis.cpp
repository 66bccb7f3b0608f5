#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "scratch.hpp"
#include "paretofact/analysis/metrics.hpp"
#include "paretofact/analysis/report.hpp"
#include "paretofact/common/error.hpp"
#include "paretofact/common/rng.hpp"
#include "paretofact/data/blobs.hpp"
#include "paretofact/moea/counterfactual.hpp"

namespace pf = paretofact;
namespace an = paretofact::analysis;
namespace fs = std::filesystem;
using pf::num::Shape;
using pf::num::Tensor;

namespace {

std::vector<float> constant(std::size_t n, float v) { return std::vector<float>(n, v); }

std::vector<float> random_image(pf::Rng& rng, std::size_t n) {
  std::vector<float> x(n);
  for (float& v : x) v = float(rng.uniform());
  return x;
}

// Four 2x2 RGB instances with hand-picked attributes.
pf::data::AnnotatedDataset hand_dataset() {
  pf::data::AnnotatedDataset d;
  d.height = 2;
  d.width = 2;
  d.channels = 3;
  d.attribute_names = {"a", "b", "c"};
  d.class_names = {"zero", "one"};
  d.images = Tensor(Shape{4, 12});
  d.attributes = Tensor(Shape{4, 3}, {0.9f, 0.9f, 0.1f,   // class 0: a b
                                      0.9f, 0.2f, 0.6f,   // class 0: a c
                                      0.6f, 0.7f, 0.8f,   // class 1: a b c
                                      0.1f, 0.5f, 0.9f}); // class 1: c (0.5 is not above)
  d.labels = {0, 0, 1, 1};
  return d;
}

}  // namespace

TEST(Luminance, ReferenceValues) {
  EXPECT_EQ(an::luminance(0, 0, 0), 0.0);
  EXPECT_EQ(an::luminance(255, 255, 255), 1.0);
  EXPECT_DOUBLE_EQ(an::luminance(255, 0, 0), 0.2126);
  EXPECT_THROW(an::luminance(256, 0, 0), pf::ContractError);
  EXPECT_THROW(an::luminance(0, -1, 0), pf::ContractError);
}

TEST(Luminance, LinearAndBounded) {
  pf::Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const double r = rng.uniform(0, 255), g = rng.uniform(0, 255), b = rng.uniform(0, 255);
    const double l = an::luminance(r, g, b);
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 1.0);
    EXPECT_NEAR(l, an::luminance(r, 0, 0) + an::luminance(0, g, 0) + an::luminance(0, 0, b), 1e-12);
    EXPECT_NEAR(an::luminance(r / 2, g / 2, b / 2), l / 2, 1e-12);
  }
}

TEST(ClassLuminance, SingletonAndMean) {
  auto d = hand_dataset();
  d.images = Tensor(Shape{4, 12}, [] {
    std::vector<float> v(48, 0.0f);
    std::fill(v.begin(), v.begin() + 12, 1.0f);   // instance 0 white
    std::fill(v.begin() + 24, v.begin() + 36, 1.0f);  // instance 2 white, instance 3 black
    return v;
  }());
  d.labels = {0, 2, 1, 1};
  d.class_names = {"zero", "one", "two"};
  const Tensor white = an::class_luminance_map(d, 0), mixed = an::class_luminance_map(d, 1);
  for (float v : white.values()) EXPECT_FLOAT_EQ(v, 1.0f);
  for (float v : mixed.values()) EXPECT_FLOAT_EQ(v, 0.5f);
  EXPECT_EQ(an::class_luminance_map(d, 0).shape(), (Shape{2, 2}));
  d.labels = {0, 0, 1, 1};
  EXPECT_THROW(an::class_luminance_map(d, 2), pf::ContractError);
}

TEST(ClassLuminance, MatchesNaiveLoop) {
  const auto d = pf::data::generate_blobs(3, 60);
  const Tensor map = an::class_luminance_map(d, 1);
  std::vector<double> want(256, 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] != 1) continue;
    ++count;
    const auto img = d.image(i);
    for (std::size_t p = 0; p < 256; ++p) {
      want[p] += (0.2126 * img[3 * p] + 0.7152 * img[3 * p + 1] + 0.0722 * img[3 * p + 2]);
    }
  }
  for (std::size_t p = 0; p < 256; ++p) EXPECT_NEAR(map[p], want[p] / double(count), 1e-6);
}

TEST(Ssim, ReferenceValues) {
  pf::Rng rng(4);
  const auto x = random_image(rng, 64), y = random_image(rng, 64);
  EXPECT_NEAR(an::ssim(x, x), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(an::ssim(x, y), an::ssim(y, x));
  EXPECT_LT(an::ssim(x, y), 1.0);
  EXPECT_GT(an::ssim(x, y), -1.0);
  EXPECT_NEAR(an::ssim(constant(64, 0), constant(64, 1)), 1e-4 / (1 + 1e-4), 1e-12);
  EXPECT_THROW(an::ssim(x, constant(63, 0)), pf::DimensionError);
}

TEST(Ssim, ColourImagesCompareOnLuminance) {
  pf::Rng rng(5);
  const auto x = random_image(rng, 48), y = random_image(rng, 48);
  const Tensor lx = an::luminance_image(x, 4, 4, 3), ly = an::luminance_image(y, 4, 4, 3);
  EXPECT_NEAR(an::ssim_image(x, y, 4, 4, 3), an::ssim(lx.values(), ly.values()), 1e-12);
  EXPECT_NEAR(an::ssim_image(x, y, 4, 4, 3), an::ssim_image(y, x, 4, 4, 3), 1e-12);
}

TEST(DiffHeatmap, ReferenceValues) {
  pf::Rng rng(6);
  const auto x = random_image(rng, 48), y = random_image(rng, 48);
  const Tensor same = an::diff_heatmap(x, x, 4, 4, 3);
  const Tensor full = an::diff_heatmap(constant(48, 0), constant(48, 1), 4, 4, 3);
  for (float v : same.values()) EXPECT_EQ(v, 0.0f);
  for (float v : full.values()) EXPECT_EQ(v, 1.0f);
  const Tensor a = an::diff_heatmap(x, y, 4, 4, 3), b = an::diff_heatmap(y, x, 4, 4, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.shape(), (Shape{4, 4}));
  for (float v : a.values()) EXPECT_TRUE(v >= 0.0f && v <= 1.0f);
  EXPECT_NEAR(a[5], (std::abs(x[15] - y[15]) + std::abs(x[16] - y[16]) + std::abs(x[17] - y[17])) / 3, 1e-6);
  EXPECT_THROW(an::diff_heatmap(x, constant(47, 0), 4, 4, 3), pf::DimensionError);
}

TEST(BiasTable, HandCountedCases) {
  const auto t = an::bias_table(hand_dataset(), {{}, {0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}});
  ASSERT_EQ(t.rows.size(), 7u);
  const std::vector<std::vector<std::size_t>> want{{2, 2}, {2, 1}, {1, 1}, {1, 2}, {1, 1}, {1, 1}, {0, 1}};
  for (std::size_t r = 0; r < 7; ++r) EXPECT_EQ(t.rows[r].counts, want[r]) << "row " << r;
  EXPECT_THROW(an::bias_table(hand_dataset(), {{3}}), pf::ContractError);
}

TEST(BiasTable, ConjunctionIsMonotoneAndOrderFree) {
  const auto d = pf::data::generate_blobs(7, 300);
  const auto combos = an::singles_and_pairs(5);
  EXPECT_EQ(combos.size(), 15u);
  const auto t = an::bias_table(d, combos);
  for (const auto& row : t.rows) {
    if (row.combination.size() != 2) continue;
    for (std::size_t single : row.combination) {
      const auto& s = t.rows[single].counts;
      for (std::size_t c = 0; c < s.size(); ++c) EXPECT_LE(row.counts[c], s[c]);
    }
  }
  std::vector<std::size_t> order(d.size());
  std::iota(order.rbegin(), order.rend(), 0);
  const auto shuffled = an::bias_table(d.subset(order), combos);
  for (std::size_t r = 0; r < t.rows.size(); ++r) EXPECT_EQ(shuffled.rows[r].counts, t.rows[r].counts);
  const auto csv = an::bias_table_to_csv(an::bias_table(hand_dataset(), {{}, {0, 1}}));
  EXPECT_NE(csv.find("(all)"), std::string::npos);
  EXPECT_NE(csv.find("a+b"), std::string::npos);
}

TEST(ClosestAdversarial, PicksLowestOwnProbability) {
  EXPECT_EQ(an::closest_adversarial(std::vector<double>{0.9, 0.6, 0.99}), 1u);
  EXPECT_EQ(an::closest_adversarial(std::vector<double>{0.5, 0.5}), 0u);
  EXPECT_THROW(an::closest_adversarial(std::vector<double>{}), pf::ContractError);
}

class Report : public ::testing::Test {
 protected:
  void SetUp() override {
    dataset = pf::data::generate_blobs(21, 60);
    pf::gan::BundleShape s;
    s.hidden = {32, 16};
    s.latent = 8;
    bundle = pf::gan::ModelBundle::create(s, 3);
    target = {pf::gan::Mlp({768, 8, 2}, pf::gan::Head::softmax), dataset.class_names};
    pf::Rng rng(4);
    target.network.initialize(rng);
    ctx = pf::objectives::AnchorContext::make(bundle, target, dataset.image(0), dataset.attribute_vector(0));
    pf::moea::NsgaConfig c;
    c.population = 12;
    c.offspring = 12;
    c.generations = 3;
    c.seed = 8;
    front = pf::moea::evolve(ctx, bundle, target, c);
    for (std::size_t i = 1; i < dataset.size(); ++i) candidates.push_back(i);
  }

  pf::analysis::FrontReport make() const {
    return an::front_report(front, ctx, bundle, target, dataset, candidates, 0, 2, {});
  }

  pf::data::AnnotatedDataset dataset;
  pf::gan::ModelBundle bundle;
  pf::gan::TargetModel target;
  pf::objectives::AnchorContext ctx;
  pf::moea::ParetoFront front;
  std::vector<std::size_t> candidates;
};

TEST_F(Report, MembersAreConsistent) {
  const auto r = make();
  ASSERT_EQ(r.members.size(), front.members.size());
  EXPECT_EQ(r.mean_abs_delta().size(), 5u);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < r.members.size(); ++i) {
    const auto& m = r.members[i];
    EXPECT_EQ(m.delta, front.members[i].delta);
    const auto d = pf::objectives::display_transform(m.raw);
    EXPECT_EQ(m.display.plausibility, d.plausibility);
    EXPECT_EQ(m.display.power, d.power);
    EXPECT_EQ(m.display.plausible, d.plausible);
    EXPECT_EQ(m.flip, m.predicted_class != r.anchor_class);
    flips += m.flip;
    EXPECT_EQ(m.predicted_class, target.predict(m.image.values()));
  }
  EXPECT_EQ(r.flip_count(), flips);
  EXPECT_LE(r.plausible_flip_count(), flips);
}

TEST_F(Report, ExemplarIsTheWeakestOppositeInstance) {
  const auto r = make();
  ASSERT_TRUE(r.exemplar_index.has_value());
  const int opposite = int(1 - r.anchor_class);
  EXPECT_EQ(dataset.labels[*r.exemplar_index], opposite);
  for (std::size_t i : candidates) {
    if (dataset.labels[i] != opposite) continue;
    EXPECT_GE(target.predict_proba(dataset.image(i))[opposite], r.exemplar_own_probability);
  }
}

TEST_F(Report, EmptyFrontIsRejected) {
  pf::moea::ParetoFront empty;
  EXPECT_THROW(an::front_report(empty, ctx, bundle, target, dataset, candidates, 0, 2, {}), pf::ContractError);
}

TEST_F(Report, RoundTripsThroughFiles) {
  const auto r = make();
  const auto dir = scratch("report");
  an::write_front_report(dir, r);
  for (const char* f : {"report.json", "front.csv", "images.cgmf", "front.svg"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto back = an::read_front_report(dir);
  ASSERT_EQ(back.members.size(), r.members.size());
  EXPECT_EQ(back.anchor_index, 0u);
  EXPECT_EQ(back.anchor_class, r.anchor_class);
  EXPECT_EQ(back.exemplar_index, r.exemplar_index);
  EXPECT_EQ(back.anchor_image, r.anchor_image);
  for (std::size_t i = 0; i < r.members.size(); ++i) {
    EXPECT_EQ(back.members[i].delta, r.members[i].delta);
    EXPECT_EQ(back.members[i].raw, r.members[i].raw);
    EXPECT_EQ(back.members[i].flip, r.members[i].flip);
    EXPECT_EQ(back.members[i].image, r.members[i].image);
  }

  std::ifstream csv(dir / "front.csv");
  std::string header, line;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("member,delta_hue,delta_brightness,delta_radius,delta_bar,delta_border,f_gan", 0), 0u);
  std::size_t rows = 0;
  while (std::getline(csv, line)) rows += !line.empty();
  EXPECT_EQ(rows, r.members.size());

  std::ofstream(dir / "report.json") << "{\"kind\": \"front_report\"";
  EXPECT_THROW(an::read_front_report(dir), pf::FormatError);
}

TEST_F(Report, SimilarityMatricesAreSymmetricWithUnitDiagonal) {
  const auto r = make();
  const auto s = an::similarity_matrices(r);
  const std::size_t n = r.members.size() + 1;
  ASSERT_EQ(s.labels.size(), n);
  EXPECT_EQ(s.anchor_heatmaps.size(), r.members.size());
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(s.ssim[i][i], 1.0, 1e-12);
    EXPECT_EQ(s.mean_diff[i][i], 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_DOUBLE_EQ(s.ssim[i][j], s.ssim[j][i]);
      EXPECT_DOUBLE_EQ(s.mean_diff[i][j], s.mean_diff[j][i]);
    }
  }
  const auto csv = an::matrix_to_csv(s.labels, s.ssim);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), std::ptrdiff_t(n + 1));
}
