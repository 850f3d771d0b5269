#include "sgan/eval.hpp"

#include "toy_nets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace sgan {
namespace {

using sgan::testing::exact_linear_network;

std::vector<int> cycle_labels(Index n, Index classes) {
  std::vector<int> y;
  for (Index i = 0; i < n; ++i) y.push_back(static_cast<int>(i % classes));
  return y;
}

// x_dim = classes; the golden network's logits are x itself.
Network identity_golden(Index classes) {
  const LatentDims dims{classes, classes, 1};
  return exact_linear_network(default_spec(Role::kClassifier, dims), Matrix::Identity(classes, classes));
}

// G(y, z) = 3y when copy_class, else 0.
Network toy_generator(Index classes, bool copy_class) {
  const LatentDims dims{classes, classes, 1};
  Matrix m = Matrix::Zero(classes + 1, classes);
  if (copy_class) m.topRows(classes) = 3.0 * Matrix::Identity(classes, classes);
  return exact_linear_network(default_spec(Role::kGenerator, dims), m);
}

TEST(Mp, OneHotFeaturesArePerfectlyPredictive) {
  const std::vector<int> y = cycle_labels(400, 4);
  EXPECT_NEAR(linear_probe_accuracy(one_hot(y, 4), y, 4), 1.0, 1e-12);
}

TEST(Mp, PureNoiseIsAtChance) {
  std::mt19937_64 rng(1);
  std::normal_distribution<Scalar> n;
  Matrix f(2000, 1);
  for (Index i = 0; i < f.rows(); ++i) f(i, 0) = n(rng);
  std::vector<int> y;
  std::uniform_int_distribution<int> cls(0, 3);
  for (Index i = 0; i < f.rows(); ++i) y.push_back(cls(rng));
  EXPECT_NEAR(linear_probe_accuracy(f, y, 4), 0.25, 0.05);
}

TEST(Mp, InvariantToRelabeling) {
  std::mt19937_64 rng(2);
  std::normal_distribution<Scalar> n;
  const std::vector<int> y = cycle_labels(300, 3);
  Matrix f(300, 2);
  for (Index i = 0; i < f.rows(); ++i) {
    f(i, 0) = y[static_cast<std::size_t>(i)] + n(rng);
    f(i, 1) = n(rng);
  }
  std::vector<int> relabeled;
  for (int v : y) relabeled.push_back((v + 1) % 3);
  EXPECT_NEAR(linear_probe_accuracy(f, y, 3), linear_probe_accuracy(f, relabeled, 3), 0.02);
}

TEST(ConditionalAccuracy, ExemplarGeneratorScoresOne) {
  const PriorSpec priors{4, 1, ZPrior::kUniform};
  EXPECT_EQ(conditional_accuracy(toy_generator(4, true), identity_golden(4), priors, 1000, 3), 1.0);
}

TEST(ConditionalAccuracy, ConstantGeneratorIsAtChance) {
  const PriorSpec priors{4, 1, ZPrior::kUniform};
  EXPECT_NEAR(conditional_accuracy(toy_generator(4, false), identity_golden(4), priors, 4000, 3), 0.25, 0.03);
}

TEST(SemiSupError, PerfectAndUniformClassifiers) {
  const std::vector<int> y = cycle_labels(100, 5);
  const Matrix x = 4.0 * one_hot(y, 5);
  EXPECT_EQ(semi_sup_error(identity_golden(5), x, y), 0.0);
  // Uniform rows: argmax falls on class 0, so only a fifth is right.
  EXPECT_NEAR(semi_sup_error(identity_golden(5), Matrix::Zero(100, 5), y), 4.0 / 5.0, 1e-12);
}

TEST(GoldenScore, ClosedForms) {
  EXPECT_NEAR(golden_score_from_probabilities(one_hot(std::vector<int>(10, 2), 4)), 1.0, 1e-12);
  EXPECT_NEAR(golden_score_from_probabilities(one_hot(cycle_labels(40, 4), 4)), 4.0, 1e-9);
  EXPECT_NEAR(golden_score_from_probabilities(Matrix::Constant(7, 4, 0.25)), 1.0, 1e-12);
  const PriorSpec priors{4, 1, ZPrior::kUniform};
  // Every sample is classified softmax(3 e_k); the mean over balanced classes is uniform.
  const Scalar hit = std::exp(3.0) / (std::exp(3.0) + 3.0), miss = 1.0 / (std::exp(3.0) + 3.0);
  const Scalar kl = hit * std::log(hit / 0.25) + 3.0 * miss * std::log(miss / 0.25);
  EXPECT_NEAR(golden_score(toy_generator(4, true), identity_golden(4), priors, 4000, 5), std::exp(kl), 0.02);
  EXPECT_NEAR(golden_score(toy_generator(4, false), identity_golden(4), priors, 1000, 5), 1.0, 1e-12);
}

DatasetSplit rings_split() {
  RingsConfig rc;
  rc.train_samples = 1016;
  rc.test_samples = 400;
  return split_labels(make_rings_dataset(rc), 16, 2);
}

TEST(GoldenClassifier, AccurateOnRingsAndDeterministic) {
  const DatasetSplit d = rings_split();
  const GoldenClassifier a = train_golden_classifier(d.full_training_set(), d.test_x, d.test_y, 4, 9);
  const GoldenClassifier b = train_golden_classifier(d.full_training_set(), d.test_x, d.test_y, 4, 9);
  EXPECT_GE(a.test_accuracy, 0.99);
  EXPECT_EQ(a.test_accuracy, accuracy(a.network, d.test_x, d.test_y));
  EXPECT_EQ(a.network.params().hash(), b.network.params().hash());
}

TEST(Evaluate, ReportsFourMetrics) {
  const DatasetSplit d = rings_split();
  ModelConfig m;
  m.dims = {2, 4, 1};
  m.generator_hidden = m.inference_hidden = m.classifier_hidden = m.critic_hidden = {8};
  const SganNetworks nets = build_sgan(m, 1);
  const Network golden = train_golden_classifier(d.full_training_set(), d.test_x, d.test_y, 4, 9).network;
  const MetricsRecord r = evaluate(nets, golden, d, {4, 1, ZPrior::kUniform}, {200, 4, {}});
  EXPECT_EQ(r.test_error, semi_sup_error(nets.classifier, d.test_x, d.test_y));
  EXPECT_GE(r.mp, 0.0);
  EXPECT_LE(r.mp, 1.0);
  EXPECT_GE(r.conditional_accuracy, 0.0);
  EXPECT_GE(r.golden_score, 1.0 - 1e-12);
  const MetricsRecord again = evaluate(nets, golden, d, {4, 1, ZPrior::kUniform}, {200, 4, {}});
  EXPECT_EQ(r.mp, again.mp);
  EXPECT_EQ(r.conditional_accuracy, again.conditional_accuracy);
}

TEST(StyleTransfer, OneRowPerTargetKeepingStyle) {
  const auto pair = sgan::testing::invertible_pair(3);
  Matrix source(1, 3);
  source << 0.7, -0.2, 0.25;
  const Matrix out = style_transfer(pair.generator, pair.inference, source, {0, 1, 2, 1});
  ASSERT_EQ(out.rows(), 4);
  for (Index r = 0; r < 4; ++r) {
    EXPECT_NEAR(out(r, 0), 0.7, 1e-12);
    EXPECT_NEAR(out(r, 1), -0.2, 1e-12);
  }
  EXPECT_NEAR(out(2, 2), 0.75, 1e-12);
  EXPECT_EQ(out.row(1), out.row(3));
}

TEST(Interpolate, EndpointsAndMidpoint) {
  const auto pair = sgan::testing::invertible_pair(3);
  RowVector a(2), b(2);
  a << -1.0, 0.5;
  b << 1.0, 1.5;
  auto g = [&](const RowVector& z) {
    return generator_forward(pair.generator, Tensor(one_hot({1}, 3)), Tensor(Matrix(z))).value();
  };
  const Matrix two = interpolate(pair.generator, 1, a, b, 2);
  EXPECT_TRUE(two.row(0).isApprox(g(a), 1e-12));
  EXPECT_TRUE(two.row(1).isApprox(g(b), 1e-12));
  const Matrix three = interpolate(pair.generator, 1, a, b, 3);
  EXPECT_TRUE(three.row(1).isApprox(g(0.5 * (a + b)), 1e-12));
  EXPECT_THROW(interpolate(pair.generator, 1, a, b, 1), std::invalid_argument);
}

}  // namespace
}  // namespace sgan
