#pragma once

// Dense 2-D tensors with reverse-mode automatic differentiation.
//
// Every tensor is a row-major (rows x cols) matrix of doubles; a batch of
// feature vectors is (batch x features) and a scalar is (1 x 1). Operations
// whose inputs require gradients record themselves in the expression graph.
// backward() flattens the graph reachable from a scalar loss into a tape
// ordered by creation, walks it in reverse exactly once and then releases it.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgan {

using Scalar = double;
using Index = Eigen::Index;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using Shape = std::array<Index, 2>;

/// Thrown when operand shapes are incompatible. The message names the op and shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an operation produces NaN or Inf from finite inputs.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string shape_string(const Shape& shape);

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor();
  explicit Tensor(Matrix value, bool requires_grad = false);

  static Tensor zeros(Index rows, Index cols, bool requires_grad = false);
  static Tensor scalar(Scalar value, bool requires_grad = false);
  static Tensor row(std::initializer_list<Scalar> values, bool requires_grad = false);

  const Matrix& value() const;
  // In-place parameter updates (optimizers, finite differences).
  Matrix& mutable_value();

  Index rows() const;
  Index cols() const;
  Index size() const { return rows() * cols(); }
  Shape shape() const { return {rows(), cols()}; }

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_grad() const;
  // Zero matrix of the right shape when no gradient has been accumulated.
  Matrix grad() const;
  void zero_grad();

  Scalar item() const;
  const std::string& op_name() const;

  // Identity of the underlying storage; copies of a Tensor share it.
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

 private:
  friend struct TensorAccess;
  explicit Tensor(std::shared_ptr<detail::Node> node);
  std::shared_ptr<detail::Node> node_;
};

/// Computes d(loss)/d(leaf) for every leaf reachable from loss that requires a
/// gradient, accumulating into the leaves' grad buffers. The graph is released.
void backward(const Tensor& loss);

/// Constant copy of the value; gradients never flow through it.
Tensor detach(const Tensor& t);

// Forward op catalog.
Tensor matmul(const Tensor& a, const Tensor& b);
// Same shape, or b a (1 x cols) row broadcast over rows, or b a 1x1 scalar.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Scalar factor);
Tensor add_scalar(const Tensor& a, Scalar offset);
Tensor concat(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, Scalar slope);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor softmax(const Tensor& a);
Tensor log(const Tensor& a);
// log(sigmoid(a)) without forming sigmoid(a); finite for any finite a.
Tensor log_sigmoid(const Tensor& a);
Tensor log_softmax(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// (rows x cols) -> (rows x 1)
Tensor row_sum(const Tensor& a);
// mean over all entries of (a - b)^2
Tensor squared_error(const Tensor& a, const Tensor& b);
// mean over rows of -sum_j onehot_ij log p_ij
Tensor cross_entropy(const Tensor& probabilities, const Tensor& onehot);
// cross_entropy(softmax(logits), onehot) evaluated through log_softmax
Tensor cross_entropy_with_logits(const Tensor& logits, const Tensor& onehot);

/// Elementwise op from a value map and its derivative. Used for ad-hoc
/// activations and to build deliberately broken rules in gradient tests.
Tensor elementwise(const Tensor& a, std::function<Scalar(Scalar)> f,
                   std::function<Scalar(Scalar)> df, std::string name);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator-(const Tensor& a) { return scale(a, -1.0); }
inline Tensor operator*(Scalar s, const Tensor& a) { return scale(a, s); }
inline Tensor operator*(const Tensor& a, Scalar s) { return scale(a, s); }

}  // namespace sgan
