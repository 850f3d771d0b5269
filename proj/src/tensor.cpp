#include "sgan/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace sgan {

namespace detail {

using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(const Matrix& out_grad, std::vector<NodePtr>& inputs)>;

struct Node {
  Matrix value;
  Matrix grad;  // empty until something is accumulated
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::string op = "leaf";
  std::vector<NodePtr> inputs;
  BackwardFn backward;
};

namespace {
std::atomic<std::uint64_t> next_node_id{1};
}

NodePtr make_node(Matrix value, bool requires_grad, std::string op) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  node->id = next_node_id.fetch_add(1, std::memory_order_relaxed);
  node->op = std::move(op);
  return node;
}

void accumulate(Node& node, const Matrix& g) {
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

}  // namespace detail

using detail::Node;
using detail::NodePtr;

struct TensorAccess {
  static const NodePtr& node(const Tensor& t) { return t.node_; }
  static Tensor wrap(NodePtr node) { return Tensor(std::move(node)); }
};

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << "(" << shape[0] << "x" << shape[1] << ")";
  return out.str();
}

Tensor::Tensor() : Tensor(Matrix(0, 0)) {}

Tensor::Tensor(Matrix value, bool requires_grad)
    : node_(detail::make_node(std::move(value), requires_grad, "leaf")) {}

Tensor::Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

Tensor Tensor::zeros(Index rows, Index cols, bool requires_grad) {
  return Tensor(Matrix::Zero(rows, cols), requires_grad);
}

Tensor Tensor::scalar(Scalar value, bool requires_grad) {
  return Tensor(Matrix::Constant(1, 1, value), requires_grad);
}

Tensor Tensor::row(std::initializer_list<Scalar> values, bool requires_grad) {
  Matrix m(1, static_cast<Index>(values.size()));
  Index j = 0;
  for (Scalar v : values) m(0, j++) = v;
  return Tensor(std::move(m), requires_grad);
}

const Matrix& Tensor::value() const { return node_->value; }
Matrix& Tensor::mutable_value() { return node_->value; }
Index Tensor::rows() const { return node_->value.rows(); }
Index Tensor::cols() const { return node_->value.cols(); }
bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::is_leaf() const { return !node_->backward; }
bool Tensor::has_grad() const { return node_->grad.size() != 0; }

Matrix Tensor::grad() const {
  if (node_->grad.size() == 0) return Matrix::Zero(rows(), cols());
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.resize(0, 0); }

Scalar Tensor::item() const {
  if (rows() != 1 || cols() != 1) {
    throw ShapeError("item: expected a 1x1 tensor, got " + shape_string(shape()));
  }
  return node_->value(0, 0);
}

const std::string& Tensor::op_name() const { return node_->op; }

namespace {

Tensor make_result(const char* op, Matrix value, std::vector<NodePtr> inputs, detail::BackwardFn fn) {
  if (!value.allFinite()) {
    throw NumericError(std::string(op) + ": non-finite output");
  }
  const bool tracked = std::any_of(inputs.begin(), inputs.end(),
                                   [](const NodePtr& n) { return n->requires_grad; });
  auto node = detail::make_node(std::move(value), tracked, op);
  if (tracked) {
    node->inputs = std::move(inputs);
    node->backward = std::move(fn);
  }
  return TensorAccess::wrap(std::move(node));
}

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                   shape_string(b.shape()));
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_mismatch(op, a, b);
}

void require_nonempty(const char* op, const Tensor& a) {
  if (a.size() == 0) throw ShapeError(std::string(op) + ": empty tensor " + shape_string(a.shape()));
}

const NodePtr& N(const Tensor& t) { return TensorAccess::node(t); }

Scalar stable_sigmoid(Scalar v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const Scalar e = std::exp(v);
  return e / (1.0 + e);
}

Matrix row_softmax(const Matrix& a) {
  Matrix out = a.colwise() - a.rowwise().maxCoeff();
  out = out.array().exp();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

}  // namespace

void backward(const Tensor& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError("backward: loss must be a 1x1 scalar, got " + shape_string(loss.shape()));
  }
  const NodePtr& root = N(loss);
  if (!root->requires_grad) return;

  // Creation order is a topological order of the graph.
  std::vector<NodePtr> tape;
  std::unordered_set<const Node*> seen;
  std::vector<NodePtr> stack{root};
  while (!stack.empty()) {
    NodePtr n = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(n.get()).second) continue;
    for (const auto& in : n->inputs) {
      if (in->requires_grad) stack.push_back(in);
    }
    tape.push_back(std::move(n));
  }
  std::sort(tape.begin(), tape.end(), [](const NodePtr& a, const NodePtr& b) { return a->id > b->id; });

  detail::accumulate(*root, Matrix::Ones(1, 1));
  for (const NodePtr& n : tape) {
    if (!n->backward) continue;
    if (n->grad.size() != 0) n->backward(n->grad, n->inputs);
  }
  for (const NodePtr& n : tape) {
    if (!n->backward) continue;
    n->grad.resize(0, 0);
    n->backward = nullptr;
    n->inputs.clear();
  }
}

Tensor detach(const Tensor& t) { return Tensor(t.value(), false); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
  Matrix out = a.value() * b.value();
  return make_result("matmul", std::move(out), {N(a), N(b)},
                     [](const Matrix& g, std::vector<NodePtr>& in) {
                       if (in[0]->requires_grad) detail::accumulate(*in[0], g * in[1]->value.transpose());
                       if (in[1]->requires_grad) detail::accumulate(*in[1], in[0]->value.transpose() * g);
                     });
}

namespace {

enum class Broadcast { kNone, kRow, kScalar };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Broadcast::kNone;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::kScalar;
  shape_mismatch(op, a, b);
}

Matrix reduce_to(const Matrix& g, Broadcast kind) {
  switch (kind) {
    case Broadcast::kRow:
      return g.colwise().sum();
    case Broadcast::kScalar:
      return Matrix::Constant(1, 1, g.sum());
    case Broadcast::kNone:
      break;
  }
  return g;
}

Tensor add_impl(const char* op, const Tensor& a, const Tensor& b, Scalar sign) {
  const Broadcast kind = broadcast_kind(op, a, b);
  Matrix out;
  switch (kind) {
    case Broadcast::kNone:
      out = a.value() + sign * b.value();
      break;
    case Broadcast::kRow:
      out = a.value().rowwise() + sign * b.value().row(0);
      break;
    case Broadcast::kScalar:
      out = a.value().array() + sign * b.value()(0, 0);
      break;
  }
  return make_result(op, std::move(out), {N(a), N(b)},
                     [kind, sign](const Matrix& g, std::vector<NodePtr>& in) {
                       detail::accumulate(*in[0], g);
                       if (in[1]->requires_grad) detail::accumulate(*in[1], sign * reduce_to(g, kind));
                     });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_impl("add", a, b, 1.0); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_impl("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Matrix out = a.value().cwiseProduct(b.value());
  return make_result("mul", std::move(out), {N(a), N(b)}, [](const Matrix& g, std::vector<NodePtr>& in) {
    if (in[0]->requires_grad) detail::accumulate(*in[0], g.cwiseProduct(in[1]->value));
    if (in[1]->requires_grad) detail::accumulate(*in[1], g.cwiseProduct(in[0]->value));
  });
}

Tensor scale(const Tensor& a, Scalar factor) {
  Matrix out = factor * a.value();
  return make_result("scale", std::move(out), {N(a)}, [factor](const Matrix& g, std::vector<NodePtr>& in) {
    detail::accumulate(*in[0], factor * g);
  });
}

Tensor add_scalar(const Tensor& a, Scalar offset) {
  Matrix out = a.value().array() + offset;
  return make_result("add_scalar", std::move(out), {N(a)},
                     [](const Matrix& g, std::vector<NodePtr>& in) { detail::accumulate(*in[0], g); });
}

Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) shape_mismatch("concat", a, b);
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const Index split = a.cols();
  return make_result("concat", std::move(out), {N(a), N(b)}, [split](const Matrix& g, std::vector<NodePtr>& in) {
    if (in[0]->requires_grad) detail::accumulate(*in[0], g.leftCols(split));
    if (in[1]->requires_grad) detail::accumulate(*in[1], g.rightCols(g.cols() - split));
  });
}

Tensor relu(const Tensor& a) { return leaky_relu(a, 0.0); }

Tensor leaky_relu(const Tensor& a, Scalar slope) {
  const char* op = slope == 0.0 ? "relu" : "leaky_relu";
  Matrix out = a.value().unaryExpr([slope](Scalar v) { return v > 0 ? v : slope * v; });
  return make_result(op, std::move(out), {N(a)}, [slope](const Matrix& g, std::vector<NodePtr>& in) {
    Matrix d = in[0]->value.unaryExpr([slope](Scalar v) { return v > 0 ? 1.0 : slope; });
    detail::accumulate(*in[0], g.cwiseProduct(d));
  });
}

Tensor sigmoid(const Tensor& a) {
  Matrix out = a.value().unaryExpr(&stable_sigmoid);
  Matrix saved = out;
  return make_result("sigmoid", std::move(out), {N(a)},
                     [s = std::move(saved)](const Matrix& g, std::vector<NodePtr>& in) {
                       detail::accumulate(*in[0], g.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix())));
                     });
}

Tensor tanh(const Tensor& a) {
  Matrix out = a.value().array().tanh();
  Matrix saved = out;
  return make_result("tanh", std::move(out), {N(a)}, [t = std::move(saved)](const Matrix& g, std::vector<NodePtr>& in) {
    detail::accumulate(*in[0], g.cwiseProduct((1.0 - t.array().square()).matrix()));
  });
}

Tensor softmax(const Tensor& a) {
  require_nonempty("softmax", a);
  Matrix out = row_softmax(a.value());
  Matrix saved = out;
  return make_result("softmax", std::move(out), {N(a)},
                     [s = std::move(saved)](const Matrix& g, std::vector<NodePtr>& in) {
                       Matrix dot = g.cwiseProduct(s).rowwise().sum();
                       Matrix centered = g.colwise() - dot.col(0);
                       detail::accumulate(*in[0], s.cwiseProduct(centered));
                     });
}

Tensor log(const Tensor& a) {
  Matrix out = a.value().array().log();
  return make_result("log", std::move(out), {N(a)}, [](const Matrix& g, std::vector<NodePtr>& in) {
    detail::accumulate(*in[0], g.cwiseQuotient(in[0]->value));
  });
}

Tensor log_sigmoid(const Tensor& a) {
  Matrix out = a.value().unaryExpr([](Scalar v) { return std::min(v, 0.0) - std::log1p(std::exp(-std::abs(v))); });
  return make_result("log_sigmoid", std::move(out), {N(a)}, [](const Matrix& g, std::vector<NodePtr>& in) {
    Matrix d = in[0]->value.unaryExpr([](Scalar v) { return stable_sigmoid(-v); });
    detail::accumulate(*in[0], g.cwiseProduct(d));
  });
}

Tensor log_softmax(const Tensor& a) {
  require_nonempty("log_softmax", a);
  const Matrix& v = a.value();
  Matrix shifted = v.colwise() - v.rowwise().maxCoeff();
  Matrix lse = shifted.array().exp().rowwise().sum().log().matrix();
  Matrix out = shifted.colwise() - lse.col(0);
  return make_result("log_softmax", std::move(out), {N(a)}, [](const Matrix& g, std::vector<NodePtr>& in) {
    Matrix s = row_softmax(in[0]->value);
    Matrix total = g.rowwise().sum();
    Matrix d = g - (s.array().colwise() * total.col(0).array()).matrix();
    detail::accumulate(*in[0], d);
  });
}

Tensor sum(const Tensor& a) {
  Matrix out = Matrix::Constant(1, 1, a.value().sum());
  const Index r = a.rows(), c = a.cols();
  return make_result("sum", std::move(out), {N(a)}, [r, c](const Matrix& g, std::vector<NodePtr>& in) {
    detail::accumulate(*in[0], Matrix::Constant(r, c, g(0, 0)));
  });
}

Tensor mean(const Tensor& a) {
  require_nonempty("mean", a);
  const Index r = a.rows(), c = a.cols();
  const Scalar n = static_cast<Scalar>(r * c);
  Matrix out = Matrix::Constant(1, 1, a.value().sum() / n);
  return make_result("mean", std::move(out), {N(a)}, [r, c, n](const Matrix& g, std::vector<NodePtr>& in) {
    detail::accumulate(*in[0], Matrix::Constant(r, c, g(0, 0) / n));
  });
}

Tensor row_sum(const Tensor& a) {
  Matrix out = a.value().rowwise().sum();
  const Index c = a.cols();
  return make_result("row_sum", std::move(out), {N(a)}, [c](const Matrix& g, std::vector<NodePtr>& in) {
    Matrix d = g.col(0).replicate(1, c);
    detail::accumulate(*in[0], d);
  });
}

Tensor squared_error(const Tensor& a, const Tensor& b) {
  require_same_shape("squared_error", a, b);
  require_nonempty("squared_error", a);
  const Scalar n = static_cast<Scalar>(a.size());
  Matrix diff = a.value() - b.value();
  Matrix out = Matrix::Constant(1, 1, diff.squaredNorm() / n);
  return make_result("squared_error", std::move(out), {N(a), N(b)},
                     [d = std::move(diff), n](const Matrix& g, std::vector<NodePtr>& in) {
                       Matrix ga = (2.0 * g(0, 0) / n) * d;
                       if (in[0]->requires_grad) detail::accumulate(*in[0], ga);
                       if (in[1]->requires_grad) detail::accumulate(*in[1], -ga);
                     });
}

Tensor cross_entropy(const Tensor& probabilities, const Tensor& onehot) {
  require_same_shape("cross_entropy", probabilities, onehot);
  require_nonempty("cross_entropy", probabilities);
  const Scalar rows = static_cast<Scalar>(probabilities.rows());
  const Matrix& p = probabilities.value();
  const Matrix& y = onehot.value();
  // 0 * log(0) contributes nothing.
  Matrix logp = p.unaryExpr([](Scalar v) { return v > 0 ? std::log(v) : 0.0; });
  const bool impossible = ((p.array() <= 0) && (y.array() != 0)).any();
  Scalar loss = impossible ? std::numeric_limits<Scalar>::infinity() : -(y.cwiseProduct(logp)).sum() / rows;
  return make_result("cross_entropy", Matrix::Constant(1, 1, loss), {N(probabilities), N(onehot)},
                     [rows, lp = std::move(logp)](const Matrix& g, std::vector<NodePtr>& in) {
                       const Scalar s = g(0, 0) / rows;
                       if (in[0]->requires_grad) {
                         Matrix d = -s * in[1]->value.cwiseQuotient(in[0]->value);
                         detail::accumulate(*in[0], d);
                       }
                       if (in[1]->requires_grad) detail::accumulate(*in[1], -s * lp);
                     });
}

Tensor cross_entropy_with_logits(const Tensor& logits, const Tensor& onehot) {
  require_same_shape("cross_entropy_with_logits", logits, onehot);
  const Scalar rows = static_cast<Scalar>(logits.rows());
  return scale(sum(mul(onehot, log_softmax(logits))), -1.0 / rows);
}

Tensor elementwise(const Tensor& a, std::function<Scalar(Scalar)> f, std::function<Scalar(Scalar)> df,
                   std::string name) {
  Matrix out = a.value().unaryExpr(f);
  auto node_fn = [df = std::move(df)](const Matrix& g, std::vector<NodePtr>& in) {
    detail::accumulate(*in[0], g.cwiseProduct(in[0]->value.unaryExpr(df)));
  };
  Tensor result = make_result("elementwise", std::move(out), {N(a)}, std::move(node_fn));
  N(result)->op = std::move(name);
  return result;
}

}  // namespace sgan
