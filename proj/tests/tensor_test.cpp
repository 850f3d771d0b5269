#include "sgan/adam.hpp"
#include "sgan/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
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

TEST(TensorOps, SigmoidOfZeroIsHalf) { EXPECT_DOUBLE_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5); }

TEST(TensorOps, SoftmaxOfEqualLogitsIsUniform) {
  const Tensor p = softmax(Tensor(Matrix::Zero(1, 10)));
  for (Index j = 0; j < 10; ++j) EXPECT_NEAR(p.value()(0, j), 0.1, 1e-15);
}

TEST(TensorOps, CrossEntropyOfUniformIsLogClasses) {
  Matrix y = Matrix::Zero(1, 10);
  y(0, 3) = 1;
  const Scalar ce = cross_entropy(Tensor(Matrix::Constant(1, 10, 0.1)), Tensor(y)).item();
  EXPECT_NEAR(ce, std::log(10.0), 1e-12);
  EXPECT_NEAR(ce, 2.302585, 1e-6);
}

TEST(TensorOps, BroadcastAddsRowAndScalar) {
  const Tensor a(Matrix::Ones(3, 2));
  const Tensor r = Tensor::row({1.0, 2.0});
  const Matrix out = add(a, r).value();
  EXPECT_DOUBLE_EQ(out(2, 0), 2.0);
  EXPECT_DOUBLE_EQ(out(2, 1), 3.0);
  EXPECT_DOUBLE_EQ(add(a, Tensor::scalar(4.0)).value()(1, 1), 5.0);
}

TEST(TensorOps, ShapeMismatchIsReported) {
  const Tensor a(Matrix::Ones(3, 4)), b(Matrix::Ones(5, 2));
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("(3x4)"), std::string::npos);
  }
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(concat(a, Tensor(Matrix::Ones(2, 2))), ShapeError);
}

TEST(TensorOps, NonFiniteResultRaises) {
  EXPECT_THROW(log(Tensor(Matrix::Zero(1, 1))), NumericError);
  Matrix y = Matrix::Zero(1, 2);
  y(0, 0) = 1;
  Matrix p(1, 2);
  p << 0.0, 1.0;
  EXPECT_THROW(cross_entropy(Tensor(p), Tensor(y)), NumericError);
}

TEST(TensorOps, StableLogSigmoidAtExtremes) {
  Matrix v(1, 2);
  v << -800.0, 800.0;
  const Matrix out = log_sigmoid(Tensor(v)).value();
  EXPECT_NEAR(out(0, 0), -800.0, 1e-9);
  EXPECT_NEAR(out(0, 1), 0.0, 1e-12);
}

TEST(TensorOps, ForwardOpsArePure) {
  const Tensor a(random_matrix(4, 3, 1));
  const Matrix before = a.value();
  const Matrix first = softmax(tanh(a)).value();
  const Matrix second = softmax(tanh(a)).value();
  EXPECT_EQ(first, second);
  EXPECT_EQ(a.value(), before);
}

TEST(Backward, QuadraticGradient) {
  Tensor w = Tensor::row({1.0, 2.0}, true);
  backward(sum(mul(w, w)));
  EXPECT_DOUBLE_EQ(w.grad()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(w.grad()(0, 1), 4.0);
}

TEST(Backward, SoftmaxCrossEntropyGradientIsProbabilitiesMinusTarget) {
  const Matrix logits = random_matrix(5, 4, 7);
  Matrix y = Matrix::Zero(5, 4);
  for (Index r = 0; r < 5; ++r) y(r, r % 4) = 1;
  Tensor l(logits, true);
  backward(cross_entropy(softmax(l), Tensor(y)));
  // Oracle: d/dlogits mean_rows CE = (softmax - onehot) / rows.
  Matrix expected(5, 4);
  for (Index r = 0; r < 5; ++r) {
    const Eigen::RowVectorXd e = (logits.row(r).array() - logits.row(r).maxCoeff()).exp().matrix();
    expected.row(r) = (e / e.sum() - y.row(r)) / 5.0;
  }
  EXPECT_LT((l.grad() - expected).cwiseAbs().maxCoeff(), 1e-12);

  Tensor l2(logits, true);
  backward(cross_entropy_with_logits(l2, Tensor(y)));
  EXPECT_LT((l2.grad() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Backward, GradientIsLinearInTheLoss) {
  const Matrix wv = random_matrix(3, 2, 11);
  const Matrix xv = random_matrix(4, 3, 12);
  auto loss_a = [&](const Tensor& w) { return mean(tanh(matmul(Tensor(xv), w))); };
  auto loss_b = [&](const Tensor& w) { return sum(mul(w, w)); };

  Tensor w1(wv, true), w2(wv, true), w3(wv, true);
  backward(loss_a(w1));
  backward(loss_b(w2));
  backward(add(loss_a(w3), loss_b(w3)));
  EXPECT_LT((w3.grad() - (w1.grad() + w2.grad())).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Backward, SharedSubexpressionAccumulates) {
  Tensor x = Tensor::scalar(3.0, true);
  const Tensor y = mul(x, x);
  backward(add(y, y));  // 2x^2 -> 4x
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 12.0);
}

TEST(Backward, GradientsAccumulateAcrossCallsUntilZeroed) {
  Tensor x = Tensor::scalar(1.0, true);
  backward(scale(x, 3.0));
  backward(scale(x, 3.0));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 6.0);
  x.zero_grad();
  EXPECT_FALSE(x.has_grad());
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 0.0);
}

TEST(Backward, DetachStopsGradient) {
  Tensor x = Tensor::scalar(2.0, true);
  backward(add(mul(x, x), detach(mul(x, x))));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 4.0);
}

TEST(Backward, GradHasValueShape) {
  Tensor w(random_matrix(3, 5, 2), true);
  backward(mean(relu(w)));
  EXPECT_EQ(w.grad().rows(), 3);
  EXPECT_EQ(w.grad().cols(), 5);
}

TEST(Backward, LossMustBeScalar) {
  Tensor w(random_matrix(2, 2, 3), true);
  EXPECT_THROW(backward(w), ShapeError);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  std::vector<Tensor> params{Tensor(random_matrix(2, 3, 5), true)};
  const Matrix before = params[0].value();
  AdamState state(params, {});
  const std::vector<Matrix> grads{Matrix::Zero(2, 3)};
  for (int i = 0; i < 5; ++i) adam_step(params, grads, state);
  EXPECT_EQ(params[0].value(), before);
  EXPECT_EQ(state.step, 5);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<Tensor> params{Tensor::scalar(1.0, true)};
  AdamOptions opts;
  opts.learning_rate = 0.1;
  AdamState state(params, opts);
  adam_step(params, std::vector<Matrix>{Matrix::Ones(1, 1)}, state);
  // Hand-evaluated recurrence: m_hat = 1, v_hat = 1, update = 0.1 / (1 + 1e-8).
  EXPECT_NEAR(params[0].value()(0, 0), 1.0 - 0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, StepCounterIncrementsByOne) {
  Tensor w = Tensor::row({1.0, -1.0}, true);
  Adam opt({w}, {});
  for (int i = 1; i <= 3; ++i) {
    opt.zero_grad();
    backward(sum(mul(w, w)));
    opt.step();
    EXPECT_EQ(opt.step_count(), i);
  }
}

TEST(Adam, RejectsMismatchedGradient) {
  std::vector<Tensor> params{Tensor(Matrix::Zero(2, 2), true)};
  AdamState state(params, {});
  EXPECT_THROW(adam_step(params, std::vector<Matrix>{Matrix::Zero(3, 2)}, state), ShapeError);
}

TEST(Adam, IdenticalRunsAreBitwiseIdentical) {
  auto run = [] {
    Tensor w(random_matrix(4, 3, 9), true);
    const Tensor x(random_matrix(6, 4, 10));
    Adam opt({w}, {});
    for (int i = 0; i < 50; ++i) {
      opt.zero_grad();
      backward(mean(sigmoid(matmul(x, w))));
      opt.step();
    }
    return w.value();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace sgan
