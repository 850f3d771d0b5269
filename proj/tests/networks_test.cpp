#include "sgan/networks.hpp"

#include <gtest/gtest.h>

#include <random>

namespace sgan {
namespace {

Matrix random_matrix(Index r, Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> d;
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

std::vector<int> cycle_labels(Index n, Index classes) {
  std::vector<int> y;
  for (Index i = 0; i < n; ++i) y.push_back(static_cast<int>(i % classes));
  return y;
}

TEST(NetworkSpec, WidthsFollowRole) {
  const LatentDims dims{5, 10, 3};
  EXPECT_EQ(default_spec(Role::kGenerator, dims).input_width(), 13);
  EXPECT_EQ(default_spec(Role::kGenerator, dims).output_width(), 5);
  EXPECT_EQ(default_spec(Role::kInference, dims).output_width(), 3);
  EXPECT_EQ(default_spec(Role::kClassifier, dims).output_width(), 10);
  EXPECT_EQ(default_spec(Role::kCriticXY, dims).input_width(), 15);
  EXPECT_EQ(default_spec(Role::kCriticXZ, dims).input_width(), 8);
  EXPECT_EQ(default_spec(Role::kCriticXZ, dims).output_width(), 1);
}

TEST(NetworkSpec, GeneratorFirstLayerTakesConcatenatedCode) {
  const LatentDims dims{784, 10, 64};
  const Network g = build_network(default_spec(Role::kGenerator, dims, {32}), 1);
  EXPECT_EQ(g.params().tensors[0].tensor.rows(), 74);
}

TEST(NetworkSpec, RejectsInvalidHeadsAndWidths) {
  NetworkSpec s = default_spec(Role::kClassifier, {});
  s.head = Head::kLinear;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  NetworkSpec c = default_spec(Role::kCriticXY, {});
  c.head = Head::kSoftmax;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  NetworkSpec z = default_spec(Role::kGenerator, {});
  z.hidden = {0};
  EXPECT_THROW(z.validate(), std::invalid_argument);
}

TEST(BuildNetwork, ParameterCountForGenerator) {
  const LatentDims dims{6, 10, 64};
  const Network g = build_network(default_spec(Role::kGenerator, dims, {32, 32}), 3);
  EXPECT_EQ(g.params().count(), 74 * 32 + 32 + 32 * 32 + 32 + 32 * 6 + 6);
}

TEST(BuildNetwork, PureFunctionOfSpecAndSeed) {
  const auto spec = default_spec(Role::kCriticXY, {});
  EXPECT_EQ(build_network(spec, 5).params().hash(), build_network(spec, 5).params().hash());
  EXPECT_NE(build_network(spec, 5).params().hash(), build_network(spec, 6).params().hash());
}

TEST(BuildNetwork, GlorotBoundsAndZeroBias) {
  const LatentDims dims{2, 4, 1};
  const Network c = build_network(default_spec(Role::kClassifier, dims, {64, 64}), 9);
  const auto& t = c.params().tensors;
  const Scalar bound = std::sqrt(6.0 / (2 + 64));
  EXPECT_LE(t[0].tensor.value().cwiseAbs().maxCoeff(), bound);
  EXPECT_EQ(t[1].tensor.value().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Generator, OutputShapeAndDeterminism) {
  const LatentDims dims{7, 10, 64};
  const Network g = build_network(default_spec(Role::kGenerator, dims, {16}), 2);
  const Tensor y(one_hot(cycle_labels(16, 10), 10));
  const Tensor z(random_matrix(16, 64, 3));
  const Tensor a = generator_forward(g, y, z);
  EXPECT_EQ(a.rows(), 16);
  EXPECT_EQ(a.cols(), 7);
  EXPECT_EQ(a.value(), generator_forward(g, y, z).value());
}

TEST(Generator, BatchRowPermutationEquivariance) {
  const LatentDims dims{3, 4, 2};
  const Network g = build_network(default_spec(Role::kGenerator, dims, {8, 8}), 4);
  const Matrix y = one_hot(cycle_labels(6, 4), 4);
  const Matrix z = random_matrix(6, 2, 5);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 3, 0, 5, 1, 4, 2;
  const Matrix out = generator_forward(g, Tensor(y), Tensor(z)).value();
  const Matrix permuted = generator_forward(g, Tensor(perm * y), Tensor(perm * z)).value();
  EXPECT_EQ(permuted, perm * out);
}

TEST(Generator, RejectsNonOneHotCondition) {
  const LatentDims dims{2, 4, 1};
  const Network g = build_network(default_spec(Role::kGenerator, dims, {4}), 1);
  Matrix y = Matrix::Constant(2, 4, 0.25);
  EXPECT_THROW(generator_forward(g, Tensor(y), Tensor(Matrix::Zero(2, 1))), std::invalid_argument);
}

TEST(Inference, ShapeAndDeterminism) {
  const LatentDims dims{5, 4, 3};
  const Network i = build_network(default_spec(Role::kInference, dims, {8}), 6);
  const Tensor x(random_matrix(8, 5, 7));
  const Tensor z = infer_z(i, x);
  EXPECT_EQ(z.rows(), 8);
  EXPECT_EQ(z.cols(), 3);
  EXPECT_EQ(z.value(), infer_z(i, x).value());
}

TEST(Classifier, ZeroFinalLayerGivesUniformRows) {
  const LatentDims dims{3, 5, 1};
  Network c = build_network(default_spec(Role::kClassifier, dims, {8}), 8);
  for (std::size_t k = 2; k < 4; ++k) c.params().tensors[k].tensor.mutable_value().setZero();
  const Matrix p = classify(c, Tensor(random_matrix(4, 3, 9))).value();
  for (Index i = 0; i < p.size(); ++i) EXPECT_NEAR(p.data()[i], 0.2, 1e-15);
}

TEST(Classifier, RowsAreDistributions) {
  const LatentDims dims{3, 6, 1};
  const Network c = build_network(default_spec(Role::kClassifier, dims, {16, 16}), 10);
  const Matrix p = classify(c, Tensor(5.0 * random_matrix(50, 3, 11))).value();
  EXPECT_GE(p.minCoeff(), 0.0);
  for (Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-9);
}

TEST(Classifier, ArgmaxStableUnderLogitShift) {
  const LatentDims dims{3, 6, 1};
  const Network c = build_network(default_spec(Role::kClassifier, dims, {16}), 12);
  const Tensor x(random_matrix(20, 3, 13));
  const Matrix logits = classifier_logits(c, x).value();
  const Matrix shifted = softmax(add_scalar(Tensor(logits), 17.5)).value();
  EXPECT_EQ(argmax_rows(shifted), argmax_rows(classify(c, x).value()));
}

TEST(Critic, ZeroWeightsGiveOneHalf) {
  const LatentDims dims{2, 4, 1};
  Network d = build_network(default_spec(Role::kCriticXY, dims, {8}), 14);
  for (auto& nt : d.params().tensors) nt.tensor.mutable_value().setZero();
  const Matrix s = critic_xy(d, Tensor(random_matrix(5, 2, 15)), Tensor(one_hot(cycle_labels(5, 4), 4))).value();
  for (Index i = 0; i < s.size(); ++i) EXPECT_EQ(s.data()[i], 0.5);
}

TEST(Critic, ScoresInOpenUnitInterval) {
  const LatentDims dims{2, 4, 3};
  const Network d = build_network(default_spec(Role::kCriticXZ, dims, {16}), 16);
  const Matrix s = critic_xz(d, Tensor(random_matrix(100, 2, 17)), Tensor(random_matrix(100, 3, 18))).value();
  EXPECT_GT(s.minCoeff(), 0.0);
  EXPECT_LT(s.maxCoeff(), 1.0);
}

TEST(Network, FrozenCopyBlocksGradient) {
  const LatentDims dims{2, 4, 1};
  Network d = build_network(default_spec(Role::kCriticXZ, dims, {4}), 19);
  Tensor x(random_matrix(3, 2, 20), true);
  const Network frozen = d.frozen();
  backward(mean(critic_xz(frozen, x, Tensor(random_matrix(3, 1, 21)))));
  EXPECT_TRUE(x.has_grad());
  for (const auto& p : d.params().list()) EXPECT_FALSE(p.has_grad());
  for (const auto& p : frozen.params().list()) EXPECT_FALSE(p.requires_grad());
}

TEST(Network, CloneDoesNotShareStorage) {
  const Network a = build_network(default_spec(Role::kInference, {}, {4}), 22);
  Network b = a.clone();
  b.params().tensors[0].tensor.mutable_value()(0, 0) += 1.0;
  EXPECT_NE(a.params().hash(), b.params().hash());
  EXPECT_FALSE(a.params().tensors[0].tensor.same_storage(b.params().tensors[0].tensor));
}

TEST(Network, RejectsMismatchedParameterShapes) {
  const auto spec = default_spec(Role::kInference, {}, {4});
  NetworkParams params = build_network(spec, 1).params().clone();
  params.tensors[0].tensor = Tensor(Matrix::Zero(3, 4), true);
  EXPECT_THROW(Network(spec, params), ShapeError);
}

}  // namespace
}  // namespace sgan
