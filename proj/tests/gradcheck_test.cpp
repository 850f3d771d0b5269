#include "sgan/gradcheck.hpp"
#include "sgan/networks.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

namespace sgan {
namespace {

TEST(GradCheck, ConstantFunctionHasZeroError) {
  Tensor w = Tensor::row({1.0, 2.0, 3.0}, true);
  const GradCheckReport r = grad_check([] { return Tensor::scalar(4.0); }, {w});
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_rel_err, 0.0);
  EXPECT_EQ(r.coordinates_checked, 3);
}

TEST(GradCheck, SigmoidMlpBinaryCrossEntropyPasses) {
  std::mt19937_64 rng(4);
  std::normal_distribution<Scalar> d;
  auto fill = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
    return m;
  };
  Tensor w1(fill(3, 5), true), b1(fill(1, 5), true), w2(fill(5, 1), true);
  const Tensor x(fill(8, 3));
  Matrix t(8, 1);
  for (Index i = 0; i < 8; ++i) t(i, 0) = i % 2;
  const Tensor target(t);
  auto f = [=] {
    const Tensor logit = matmul(sigmoid(add(matmul(x, w1), b1)), w2);
    // -[t log s + (1 - t) log(1 - s)] through log_sigmoid
    return -mean(add(mul(target, log_sigmoid(logit)), mul(add_scalar(-target, 1.0), log_sigmoid(-logit))));
  };
  const GradCheckReport r = grad_check(f, {w1, b1, w2});
  EXPECT_TRUE(r.pass) << r.max_rel_err;
  EXPECT_LT(r.max_rel_err, 1e-6);
}

TEST(GradCheck, CorruptedBackwardRuleFails) {
  Tensor a = Tensor::row({0.3, -0.7, 1.1}, true);
  auto f = [=] {
    return sum(elementwise(
        a, [](Scalar v) { return v * v; }, [](Scalar v) { return 3 * v; }, "bad_square"));
  };
  EXPECT_FALSE(grad_check(f, {a}).pass);
}

TEST(GradCheckSuite, EveryCatalogOpAndNetworkPasses) {
  const auto results = run_gradcheck_suite();
  std::set<std::string> names;
  for (const auto& c : results) {
    names.insert(c.name);
    EXPECT_TRUE(c.report.pass) << c.name << " max_rel_err=" << c.report.max_rel_err;
    EXPECT_GT(c.report.coordinates_checked, 0) << c.name;
  }
  for (const char* op : {"matmul", "add", "sub", "mul", "scale", "add_scalar", "concat", "relu", "leaky_relu",
                         "sigmoid", "tanh", "softmax", "log", "log_sigmoid", "log_softmax", "sum", "mean",
                         "row_sum", "squared_error", "cross_entropy", "cross_entropy_with_logits", "network:G",
                         "network:I", "network:C", "network:Dxy", "network:Dxz"}) {
    EXPECT_TRUE(names.count(op)) << op;
  }
}

TEST(GradCheckSuite, InjectedFaultIsCaught) {
  GradCheckSuiteOptions options;
  options.seeds = 3;
  options.inject_fault = true;
  bool seen = false;
  for (const auto& c : run_gradcheck_suite(options)) {
    if (c.name == "faulty_sigmoid") {
      seen = true;
      EXPECT_FALSE(c.report.pass);
    }
  }
  EXPECT_TRUE(seen);
}

TEST(GradCheck, SquaredNormOfInferenceOutput) {
  const LatentDims dims{3, 4, 2};
  Network i = build_network(default_spec(Role::kInference, dims, {7}), 21);
  // Nonzero biases so the ReLU layer is not symmetric around the origin.
  i.params().tensors[1].tensor.mutable_value().setConstant(0.3);
  const Tensor x(Matrix::Constant(5, 3, 0.5) + Matrix::Identity(5, 3));
  auto f = [=] {
    const Tensor z = infer_z(i, x);
    return sum(mul(z, z));
  };
  EXPECT_TRUE(grad_check(f, i.params().list()).pass);
}

}  // namespace
}  // namespace sgan
