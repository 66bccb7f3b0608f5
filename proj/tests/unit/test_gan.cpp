#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "scratch.hpp"
#include "paretofact/common/cgmf.hpp"
#include "paretofact/common/error.hpp"
#include "paretofact/common/rng.hpp"
#include "paretofact/data/blobs.hpp"
#include "paretofact/data/split.hpp"
#include "paretofact/gan/bundle.hpp"
#include "paretofact/gan/losses.hpp"
#include "paretofact/gan/model_io.hpp"
#include "paretofact/gan/target.hpp"
#include "paretofact/gan/training.hpp"
#include "paretofact/num/ops.hpp"

namespace pf = paretofact;
namespace fs = std::filesystem;
using pf::num::Shape;
using pf::num::Tensor;
using DTensor = pf::num::BasicTensor<double>;

namespace {

pf::gan::BundleShape small_shape() {
  pf::gan::BundleShape s;
  s.image_shape = {4, 4, 3};
  s.latent = 6;
  s.attributes = 5;
  s.hidden = {16, 8};
  return s;
}

double lrelu(double v) { return v >= 0 ? v : 0.2 * v; }
double sig(double v) { return 1 / (1 + std::exp(-v)); }

void set(pf::gan::BasicMlp<double>& net, std::size_t layer, std::vector<double> w, double b) {
  net.layers()[layer].weight.value = DTensor(net.layers()[layer].weight.value.shape(), std::move(w));
  net.layers()[layer].bias.value = DTensor(Shape{1}, {b});
}

// One pixel, one latent unit, one attribute, one hidden unit: every network
// is a chain of scalars that can be written out by hand.
struct Toy {
  pf::gan::BasicModelBundle<double> bundle;
  double x = 0.7, a = 0.2, b = 0.9;

  Toy() {
    pf::gan::BundleShape s;
    s.image_shape = {1, 1, 1};
    s.latent = 1;
    s.attributes = 1;
    s.hidden = {1};
    bundle = pf::gan::ModelBundle::create(s, 1).cast<double>();
    set(bundle.encoder, 0, {0.8}, -0.1);
    set(bundle.encoder, 1, {1.3}, 0.05);
    set(bundle.decoder, 0, {0.6, -0.9}, 0.2);
    set(bundle.decoder, 1, {1.7}, -0.3);
    set(bundle.trunk, 0, {-1.1}, 0.4);
    set(bundle.critic_head, 0, {0.75}, 0.1);
    set(bundle.plausibility_head, 0, {2.0}, -0.5);
    set(bundle.attribute_head, 0, {-1.4}, 0.3);
  }

  pf::gan::BasicBatch<double> batch() const {
    return {DTensor(Shape{1, 1}, {x}), DTensor(Shape{1, 1}, {a}), DTensor(Shape{1, 1}, {b})};
  }

  double z() const { return 1.3 * lrelu(0.8 * x - 0.1) + 0.05; }
  double dec(double c) const { return sig(1.7 * lrelu(0.6 * z() - 0.9 * c + 0.2) - 0.3); }
  static double feat(double y) { return lrelu(-1.1 * y + 0.4); }
  static double critic(double y) { return 0.75 * feat(y) + 0.1; }
  static double plaus(double y) { return sig(2.0 * feat(y) - 0.5); }
  static double attr(double y) { return sig(-1.4 * feat(y) + 0.3); }
  static double bce(double t, double p) { return -(t * std::log(p) + (1 - t) * std::log(1 - p)); }
};

}  // namespace

TEST(Mlp, LayerShapesCompose) {
  pf::gan::Mlp net({7, 5, 3}, pf::gan::Head::softmax);
  pf::Rng rng(1);
  net.initialize(rng);
  ASSERT_EQ(net.layers().size(), 2u);
  EXPECT_EQ(net.layers()[0].weight.value.shape(), (Shape{7, 5}));
  EXPECT_EQ(net.layers()[1].weight.value.shape(), (Shape{5, 3}));
  EXPECT_EQ(net.parameters().size(), 4u);
  const Tensor out = net.infer(Tensor(Shape{2, 7}));
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0;
    for (float v : out.row(r)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Bundle, DecoderWidthFollowsMode) {
  auto s = small_shape();
  EXPECT_EQ(s.decoder_input(), 11u);
  s.mode = pf::gan::Mode::non_conditional;
  EXPECT_EQ(s.decoder_input(), 6u);
  const auto b = pf::gan::ModelBundle::create(s, 3);
  EXPECT_EQ(b.decoder.input_width(), 6u);
}

TEST(Bundle, EncodeDecodeContracts) {
  const auto b = pf::gan::ModelBundle::create(small_shape(), 5);
  pf::Rng rng(2);
  Tensor x(Shape{3, 48});
  for (float& v : x.values()) v = float(rng.uniform());
  Tensor attrs(Shape{3, 5});
  for (float& v : attrs.values()) v = float(rng.uniform());
  const Tensor z = b.encode(x);
  EXPECT_EQ(z.shape(), (Shape{3, 6}));
  EXPECT_EQ(z, b.encode(x));
  const Tensor y = b.decode(z, attrs);
  EXPECT_EQ(y.shape(), x.shape());
  for (float v : y.values()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_THROW(b.decode(z, Tensor(Shape{3, 4})), pf::DimensionError);
  EXPECT_THROW(b.encode(Tensor(Shape{3, 47})), pf::DimensionError);
  const Tensor plaus = b.plausibility(x);
  for (float v : plaus.values()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Bundle, ZeroEncoderGivesZeroLatent) {
  auto b = pf::gan::ModelBundle::create(small_shape(), 5);
  for (auto* p : b.encoder.parameters()) p->value.fill(0.0f);
  const Tensor z = b.encode(Tensor(Shape{1, 48}));
  for (float v : z.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Bundle, CriticAndClassifierShareTheTrunk) {
  auto b = pf::gan::ModelBundle::create(small_shape(), 6);
  pf::Rng rng(3);
  Tensor x(Shape{2, 48});
  for (float& v : x.values()) v = float(rng.uniform());
  const Tensor d0 = b.critic_score(x), c0 = b.predict_attributes(x);
  // One parameter object feeds both heads.
  b.trunk.layers()[0].weight.value[0] += 5.0f;
  EXPECT_NE(b.critic_score(x), d0);
  EXPECT_NE(b.predict_attributes(x), c0);
  const auto critic = b.critic_parameters();
  const auto clipped = b.clipped_parameters();
  EXPECT_EQ(critic.front(), clipped.front());
}

TEST(Losses, ReconstructionReferenceValues) {
  pf::Rng rng(4);
  Tensor x(Shape{2, 12}), y(Shape{2, 12});
  for (float& v : x.values()) v = float(rng.uniform());
  for (float& v : y.values()) v = float(rng.uniform());
  EXPECT_EQ(pf::gan::loss_rec(x, x), 0.0);
  EXPECT_DOUBLE_EQ(pf::gan::loss_rec(Tensor(Shape{2, 12}), Tensor::full(Shape{2, 12}, 1.0f)), 1.0);
  EXPECT_DOUBLE_EQ(pf::gan::loss_rec(x, y), pf::gan::loss_rec(y, x));
  EXPECT_THROW(pf::gan::loss_rec(x, Tensor(Shape{2, 11})), pf::DimensionError);
}

TEST(Losses, AttributeReferenceValues) {
  EXPECT_NEAR(pf::gan::loss_att(Tensor(Shape{1, 1}, {1}), Tensor(Shape{1, 1}, {0.5f})), std::log(2.0), 1e-7);
  EXPECT_NEAR(pf::gan::loss_att(Tensor(Shape{1, 2}, {1, 0}), Tensor(Shape{1, 2}, {0.9f, 0.2f})),
              -std::log(0.9) - std::log(0.8), 1e-6);
  EXPECT_NEAR(-std::log(0.9) - std::log(0.8), 0.3285, 1e-4);
  EXPECT_NEAR(pf::gan::loss_att(Tensor(Shape{1, 2}, {1, 1}), Tensor(Shape{1, 2}, {1, 1})), 0.0, 1e-6);
  EXPECT_THROW(pf::gan::loss_att(Tensor(Shape{1, 2}), Tensor(Shape{1, 3})), pf::DimensionError);
}

TEST(Losses, AdversarialGeneratorReferenceValues) {
  EXPECT_EQ(pf::gan::loss_adv_g(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_EQ(pf::gan::loss_adv_g(std::vector<double>{1, 3}), -2.0);
  pf::Rng rng(5);
  std::vector<double> s(100);
  double sum = 0;
  for (double& v : s) sum += (v = rng.uniform(-3, 3));
  EXPECT_NEAR(pf::gan::loss_adv_g(s), -sum / 100, 1e-12);
}

TEST(Losses, GeneratorMatchesHandComputation) {
  Toy toy;
  const pf::gan::LossWeights w{2.0, 0.7, 1.5};
  const auto got = pf::gan::evaluate_generator_loss(toy.bundle, toy.batch(), w);
  const double rec = std::abs(toy.x - toy.dec(toy.a));
  const double xb = toy.dec(toy.b);
  const double att = Toy::bce(toy.b, Toy::attr(xb));
  const double adv = -Toy::critic(xb);
  EXPECT_NEAR(got.rec, rec, 1e-12);
  EXPECT_NEAR(got.att, att, 1e-12);
  EXPECT_NEAR(got.adv, adv, 1e-12);
  EXPECT_NEAR(got.total, 2.0 * rec + 0.7 * att + adv, 1e-5);
}

TEST(Losses, CriticMatchesHandComputation) {
  Toy toy;
  const pf::gan::LossWeights w{2.0, 0.7, 1.5};
  const auto got = pf::gan::evaluate_critic_loss(toy.bundle, toy.batch(), w);
  const double xb = toy.dec(toy.b);
  const double adv = -Toy::critic(toy.x) + Toy::critic(xb);
  const double att = Toy::bce(toy.a, Toy::attr(toy.x));
  EXPECT_NEAR(got.adv, adv, 1e-12);
  EXPECT_NEAR(got.att, att, 1e-12);
  EXPECT_NEAR(got.total, 1.5 * att + adv, 1e-5);
  EXPECT_NEAR(got.plausibility, -std::log(Toy::plaus(toy.x)) - std::log(1 - Toy::plaus(xb)), 1e-12);
}

TEST(Losses, WeightZeroingReducesComposites) {
  auto b = pf::gan::ModelBundle::create(small_shape(), 8);
  pf::Rng rng(6);
  pf::gan::Batch batch{Tensor(Shape{4, 48}), Tensor(Shape{4, 5}), pf::gan::sample_attribute_prior(rng, 4, 5)};
  for (float& v : batch.images.values()) v = float(rng.uniform());
  for (float& v : batch.attributes.values()) v = float(rng.uniform());

  const auto adv_only = pf::gan::evaluate_generator_loss(b, batch, {0, 0, 1});
  EXPECT_DOUBLE_EQ(adv_only.total, adv_only.adv);
  const auto no_att = pf::gan::evaluate_generator_loss(b, batch, {3, 0, 1});
  EXPECT_NEAR(no_att.total, 3 * no_att.rec + no_att.adv, 1e-6);

  // Without attributes the same weights reduce to the two-term form.
  auto s = small_shape();
  s.mode = pf::gan::Mode::non_conditional;
  auto plain = pf::gan::ModelBundle::create(s, 8);
  const auto nc = pf::gan::evaluate_generator_loss(plain, batch, {3, 0, 1});
  EXPECT_NEAR(nc.total, 3 * nc.rec + nc.adv, 1e-6);

  const auto crit = pf::gan::evaluate_critic_loss(b, batch, {1, 1, 0});
  EXPECT_NEAR(crit.total, crit.adv, 1e-6);
  EXPECT_THROW(pf::gan::evaluate_generator_loss(b, batch, {-1, 0, 1}), pf::ContractError);
  EXPECT_THROW(pf::gan::evaluate_critic_loss(b, batch, {1, 1, -0.5}), pf::ContractError);
}

TEST(Losses, AdversarialCriticCancelsOnIdenticalScores) {
  pf::num::BasicGraph<double> g;
  const auto s = g.input(DTensor(Shape{3, 1}, {0.2, -1.0, 4.0}));
  EXPECT_EQ(g.value(pf::gan::loss_adv_d(g, s, s))[0], 0.0);
}

TEST(AttributePrior, RangeDeterminismAndMean) {
  pf::Rng a(11), b(11);
  const Tensor x = pf::gan::sample_attribute_prior(a, 10000, 3);
  EXPECT_EQ(x, pf::gan::sample_attribute_prior(b, 10000, 3));
  std::vector<double> mean(3, 0.0);
  for (std::size_t r = 0; r < 10000; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      const float v = x.at(r, c);
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
      mean[c] += v / 10000.0;
    }
  }
  for (double m : mean) EXPECT_NEAR(m, 0.5, 0.02);
}

class Training : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dataset_ = new pf::data::AnnotatedDataset(pf::data::generate_blobs(42, 400));
    plan_ = new pf::data::SplitPlan(pf::data::make_split(*dataset_, {0.4, 0.4, 0.2}, 42));
  }
  static void TearDownTestSuite() {
    delete dataset_;
    delete plan_;
  }
  static pf::gan::TrainConfig config(std::size_t epochs) {
    pf::gan::TrainConfig c;
    c.epochs = epochs;
    c.seed = 3;
    return c;
  }
  static pf::data::AnnotatedDataset* dataset_;
  static pf::data::SplitPlan* plan_;
};
pf::data::AnnotatedDataset* Training::dataset_ = nullptr;
pf::data::SplitPlan* Training::plan_ = nullptr;

TEST_F(Training, ZeroEpochsLeavesParametersUnchanged) {
  auto b = pf::gan::ModelBundle::create({}, 1);
  const auto before = pf::gan::bundle_to_file(b);
  const auto history = pf::gan::train(b, *dataset_, plan_->gan_train, config(0));
  EXPECT_TRUE(history.epochs.empty());
  EXPECT_EQ(pf::cgmf::encode(pf::gan::bundle_to_file(b)), pf::cgmf::encode(before));
}

TEST_F(Training, DeterministicAndClipped) {
  auto b1 = pf::gan::ModelBundle::create({}, 1), b2 = pf::gan::ModelBundle::create({}, 1);
  const auto h1 = pf::gan::train(b1, *dataset_, plan_->gan_train, config(2));
  const auto h2 = pf::gan::train(b2, *dataset_, plan_->gan_train, config(2));
  ASSERT_EQ(h1.epochs.size(), 2u);
  for (std::size_t e = 0; e < 2; ++e) {
    EXPECT_EQ(h1.epochs[e].generator, h2.epochs[e].generator);
    EXPECT_EQ(h1.epochs[e].critic, h2.epochs[e].critic);
  }
  EXPECT_EQ(pf::cgmf::encode(pf::gan::bundle_to_file(b1)), pf::cgmf::encode(pf::gan::bundle_to_file(b2)));
  for (auto* p : b1.clipped_parameters()) {
    for (float v : p->value.values()) {
      EXPECT_LE(std::abs(v), 0.01f);
    }
  }
}

// The reference configuration: 2000 blobs, default split, shape and schedule.
TEST(ReferenceTraining, ReconstructsHeldOutData) {
  const auto data = pf::data::generate_blobs(42, 2000);
  const auto plan = pf::data::make_split(data, {0.4, 0.4, 0.2}, 42);
  auto b = pf::gan::ModelBundle::create({}, 42);
  pf::gan::TrainConfig c;
  c.seed = 42;
  const auto history = pf::gan::train(b, data, plan.gan_train, c);
  ASSERT_EQ(history.epochs.size(), 80u);
  EXPECT_LT(history.epochs.back().rec, 0.25 * history.epochs.front().rec);
  const Tensor x = data.gather_images(plan.target_holdout);
  const Tensor rec = b.decode(b.encode(x), data.gather_attributes(plan.target_holdout));
  EXPECT_LT(pf::gan::loss_rec(x, rec), 0.15);
}

TEST_F(Training, RejectsEmptyIndexSetAndBadConfig) {
  auto b = pf::gan::ModelBundle::create({}, 1);
  EXPECT_THROW(pf::gan::train(b, *dataset_, std::vector<std::size_t>{}, config(1)), pf::ContractError);
  auto c = config(1);
  c.clip = -1;
  EXPECT_THROW(pf::gan::train(b, *dataset_, plan_->gan_train, c), pf::ContractError);
}

TEST_F(Training, TargetReachesReferenceAccuracy) {
  const auto full = pf::data::generate_blobs(42, 2000);
  const auto plan = pf::data::make_split(full, {0.4, 0.4, 0.2}, 42);
  pf::gan::TargetConfig c;
  c.seed = 42;
  const auto t1 = pf::gan::train_target(full, plan, c);
  EXPECT_GE(t1.holdout_accuracy, 0.90);
  const auto t2 = pf::gan::train_target(full, plan, c);
  EXPECT_EQ(t1.loss_history, t2.loss_history);
  const auto p = t1.model.predict_proba(full.image(0));
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6);
}

TEST_F(Training, TargetOnConstantLabelsIsPerfect) {
  auto constant = *dataset_;
  for (int& l : constant.labels) l = 0;
  pf::gan::TargetConfig c;
  c.epochs = 3;
  EXPECT_EQ(pf::gan::train_target(constant, *plan_, c).holdout_accuracy, 1.0);
}

TEST_F(Training, TargetRefusesOverlappingSplits) {
  auto leaky = *plan_;
  leaky.target_train.push_back(leaky.target_holdout.front());
  EXPECT_THROW(pf::gan::train_target(*dataset_, leaky, {}), pf::LeakageError);
  leaky = *plan_;
  leaky.gan_train.push_back(leaky.target_train.front());
  EXPECT_THROW(pf::gan::train_target(*dataset_, leaky, {}), pf::LeakageError);
}

TEST(ModelIo, BundleRoundTripIsBitExact) {
  const auto dir = scratch("model-io");
  for (auto mode : {pf::gan::Mode::conditional, pf::gan::Mode::non_conditional}) {
    auto s = small_shape();
    s.mode = mode;
    const auto b = pf::gan::ModelBundle::create(s, 77);
    pf::gan::save_bundle(dir / "b.cgmf", b);
    const auto back = pf::gan::load_bundle(dir / "b.cgmf");
    EXPECT_EQ(back.shape.mode, mode);
    EXPECT_EQ(back.seed, 77u);
    const auto x = b.named_parameters();
    const auto y = back.named_parameters();
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_EQ(x[i].first, y[i].first);
      EXPECT_EQ(x[i].second->value, y[i].second->value);
    }
  }
}

TEST(ModelIo, TargetRoundTrip) {
  const auto dir = scratch("target-io");
  pf::gan::TargetModel t{pf::gan::Mlp({48, 5, 2}, pf::gan::Head::softmax), {"dim", "bright"}};
  pf::Rng rng(1);
  t.network.initialize(rng);
  pf::gan::save_target(dir / "t.cgmf", t);
  const auto back = pf::gan::load_target(dir / "t.cgmf");
  EXPECT_EQ(back.class_labels, t.class_labels);
  std::vector<float> img(48, 0.3f);
  EXPECT_EQ(back.predict_proba(img), t.predict_proba(img));
}

TEST(ModelIo, CorruptFilesRaiseFormatErrors) {
  const auto b = pf::gan::ModelBundle::create(small_shape(), 2);
  auto bytes = pf::cgmf::encode(pf::gan::bundle_to_file(b));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(pf::gan::bundle_from_file(pf::cgmf::decode(bad_magic)), pf::FormatError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(pf::cgmf::decode(truncated), pf::FormatError);

  // A blob whose shape disagrees with the network it should fill.
  auto file = pf::gan::bundle_to_file(b);
  file.tensors[0].tensor = Tensor(Shape{1, 1});
  try {
    pf::gan::bundle_from_file(file);
    FAIL() << "expected FormatError";
  } catch (const pf::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("expected"), std::string::npos) << e.what();
  }
}
