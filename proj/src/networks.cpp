#include "sgan/networks.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

namespace sgan {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kGenerator:
      return "G";
    case Role::kInference:
      return "I";
    case Role::kClassifier:
      return "C";
    case Role::kCriticXY:
      return "Dxy";
    case Role::kCriticXZ:
      return "Dxz";
  }
  return "?";
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kLeakyRelu:
      return "leaky_relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kSigmoid:
      return "sigmoid";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  for (Activation a : {Activation::kRelu, Activation::kLeakyRelu, Activation::kTanh, Activation::kSigmoid}) {
    if (activation_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view head_name(Head h) {
  switch (h) {
    case Head::kLinear:
      return "linear";
    case Head::kSigmoid:
      return "sigmoid";
    case Head::kSoftmax:
      return "softmax";
  }
  return "?";
}

Index NetworkSpec::input_width() const {
  switch (role) {
    case Role::kGenerator:
      return dims.y_dim + dims.z_dim;
    case Role::kInference:
    case Role::kClassifier:
      return dims.x_dim;
    case Role::kCriticXY:
      return dims.x_dim + dims.y_dim;
    case Role::kCriticXZ:
      return dims.x_dim + dims.z_dim;
  }
  return 0;
}

Index NetworkSpec::output_width() const {
  switch (role) {
    case Role::kGenerator:
      return dims.x_dim;
    case Role::kInference:
      return dims.z_dim;
    case Role::kClassifier:
      return dims.y_dim;
    case Role::kCriticXY:
    case Role::kCriticXZ:
      return 1;
  }
  return 0;
}

void NetworkSpec::validate() const {
  const std::string who(role_name(role));
  if (dims.x_dim <= 0 || dims.y_dim <= 0 || dims.z_dim <= 0) {
    throw std::invalid_argument(who + ": x_dim, y_dim and z_dim must be positive");
  }
  for (Index w : hidden) {
    if (w <= 0) throw std::invalid_argument(who + ": zero-width hidden layer");
  }
  if (activations.size() != hidden.size()) {
    throw std::invalid_argument(who + ": " + std::to_string(hidden.size()) + " hidden layers but " +
                                std::to_string(activations.size()) + " activations");
  }
  bool head_ok = false;
  switch (role) {
    case Role::kGenerator:
      head_ok = head == Head::kLinear || head == Head::kSigmoid;
      break;
    case Role::kInference:
      head_ok = head == Head::kLinear;
      break;
    case Role::kClassifier:
      head_ok = head == Head::kSoftmax;
      break;
    case Role::kCriticXY:
    case Role::kCriticXZ:
      head_ok = head == Head::kSigmoid;
      break;
  }
  if (!head_ok) throw std::invalid_argument(who + ": head '" + std::string(head_name(head)) + "' not allowed");
}

NetworkSpec default_spec(Role role, const LatentDims& dims, std::vector<Index> hidden, Head generator_head) {
  NetworkSpec spec;
  spec.role = role;
  spec.dims = dims;
  const bool critic = role == Role::kCriticXY || role == Role::kCriticXZ;
  spec.activations.assign(hidden.size(), critic ? Activation::kLeakyRelu : Activation::kRelu);
  spec.hidden = std::move(hidden);
  switch (role) {
    case Role::kGenerator:
      spec.head = generator_head;
      break;
    case Role::kInference:
      spec.head = Head::kLinear;
      break;
    case Role::kClassifier:
      spec.head = Head::kSoftmax;
      break;
    case Role::kCriticXY:
    case Role::kCriticXZ:
      spec.head = Head::kSigmoid;
      break;
  }
  return spec;
}

std::vector<Tensor> NetworkParams::list() const {
  std::vector<Tensor> out;
  out.reserve(tensors.size());
  for (const auto& nt : tensors) out.push_back(nt.tensor);
  return out;
}

Index NetworkParams::count() const {
  Index n = 0;
  for (const auto& nt : tensors) n += nt.tensor.size();
  return n;
}

NetworkParams NetworkParams::clone(bool requires_grad) const {
  NetworkParams out;
  out.seed = seed;
  out.tensors.reserve(tensors.size());
  for (const auto& nt : tensors) out.tensors.push_back({nt.name, Tensor(nt.tensor.value(), requires_grad)});
  return out;
}

std::uint64_t NetworkParams::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& nt : tensors) {
    const Shape s = nt.tensor.shape();
    mix(s.data(), sizeof(Index) * 2);
    mix(nt.tensor.value().data(), sizeof(Scalar) * static_cast<std::size_t>(nt.tensor.size()));
  }
  return h;
}

bool NetworkParams::all_finite() const {
  for (const auto& nt : tensors) {
    if (!nt.tensor.value().allFinite()) return false;
  }
  return true;
}

Network::Network(NetworkSpec spec, NetworkParams params) : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  const std::size_t layers = spec_.hidden.size() + 1;
  if (params_.tensors.size() != 2 * layers) {
    throw std::invalid_argument(std::string(role_name(spec_.role)) + ": expected " + std::to_string(2 * layers) +
                                " parameter tensors, got " + std::to_string(params_.tensors.size()));
  }
  Index fan_in = spec_.input_width();
  for (std::size_t l = 0; l < layers; ++l) {
    const Index fan_out = l + 1 < layers ? spec_.hidden[l] : spec_.output_width();
    const Shape w = params_.tensors[2 * l].tensor.shape();
    const Shape b = params_.tensors[2 * l + 1].tensor.shape();
    if (w != Shape{fan_in, fan_out} || b != Shape{1, fan_out}) {
      throw ShapeError(std::string(role_name(spec_.role)) + ": layer " + std::to_string(l) + " has weight " +
                       shape_string(w) + " and bias " + shape_string(b) + ", expected " +
                       shape_string({fan_in, fan_out}) + " and " + shape_string({1, fan_out}));
    }
    fan_in = fan_out;
  }
}

namespace {

Tensor activate(const Tensor& t, Activation a, Scalar slope) {
  switch (a) {
    case Activation::kRelu:
      return relu(t);
    case Activation::kLeakyRelu:
      return leaky_relu(t, slope);
    case Activation::kTanh:
      return tanh(t);
    case Activation::kSigmoid:
      return sigmoid(t);
  }
  return t;
}

}  // namespace

Tensor Network::logits(const Tensor& input) const {
  if (input.cols() != spec_.input_width()) {
    throw ShapeError(std::string(role_name(spec_.role)) + ": input " + shape_string(input.shape()) + " but width " +
                     std::to_string(spec_.input_width()) + " expected");
  }
  Tensor h = input;
  const std::size_t layers = spec_.hidden.size() + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    h = add(matmul(h, params_.tensors[2 * l].tensor), params_.tensors[2 * l + 1].tensor);
    if (l + 1 < layers) h = activate(h, spec_.activations[l], spec_.leaky_slope);
  }
  return h;
}

Tensor Network::forward(const Tensor& input) const {
  Tensor out = logits(input);
  switch (spec_.head) {
    case Head::kLinear:
      return out;
    case Head::kSigmoid:
      return sigmoid(out);
    case Head::kSoftmax:
      return softmax(out);
  }
  return out;
}

Network Network::clone() const { return Network(spec_, params_.clone(true)); }
Network Network::frozen() const { return Network(spec_, params_.clone(false)); }

Network build_network(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  NetworkParams params;
  params.seed = seed;
  Index fan_in = spec.input_width();
  const std::size_t layers = spec.hidden.size() + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const Index fan_out = l + 1 < layers ? spec.hidden[l] : spec.output_width();
    const Scalar limit = std::sqrt(6.0 / static_cast<Scalar>(fan_in + fan_out));
    std::uniform_real_distribution<Scalar> dist(-limit, limit);
    Matrix w(fan_in, fan_out);
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    params.tensors.push_back({"W" + std::to_string(l), Tensor(std::move(w), true)});
    params.tensors.push_back({"b" + std::to_string(l), Tensor::zeros(1, fan_out, true)});
    fan_in = fan_out;
  }
  return Network(spec, std::move(params));
}

void require_one_hot(const Tensor& y, Index classes, std::string_view who) {
  if (y.cols() != classes) {
    throw ShapeError(std::string(who) + ": condition " + shape_string(y.shape()) + " but " +
                     std::to_string(classes) + " classes expected");
  }
  const Matrix& v = y.value();
  for (Index r = 0; r < v.rows(); ++r) {
    int ones = 0;
    for (Index c = 0; c < v.cols(); ++c) {
      const Scalar e = v(r, c);
      if (e == 1.0) {
        ++ones;
      } else if (e != 0.0) {
        ones = -1;
        break;
      }
    }
    if (ones != 1) throw std::invalid_argument(std::string(who) + ": row " + std::to_string(r) + " is not one-hot");
  }
}

namespace {

void require_rows(const char* who, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError(std::string(who) + ": batch sizes differ " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

}  // namespace

Tensor generator_forward(const Network& g, const Tensor& y, const Tensor& z) {
  require_rows("generator", y, z);
  require_one_hot(y, g.spec().dims.y_dim, "generator");
  return g.forward(concat(y, z));
}

Tensor infer_z(const Network& i, const Tensor& x) { return i.forward(x); }
Tensor classify(const Network& c, const Tensor& x) { return c.forward(x); }
Tensor classifier_logits(const Network& c, const Tensor& x) { return c.logits(x); }

Tensor critic_xy_logits(const Network& d, const Tensor& x, const Tensor& y) {
  require_rows("critic_xy", x, y);
  return d.logits(concat(x, y));
}

Tensor critic_xz_logits(const Network& d, const Tensor& x, const Tensor& z) {
  require_rows("critic_xz", x, z);
  return d.logits(concat(x, z));
}

Tensor critic_xy(const Network& d, const Tensor& x, const Tensor& y) { return sigmoid(critic_xy_logits(d, x, y)); }
Tensor critic_xz(const Network& d, const Tensor& x, const Tensor& z) { return sigmoid(critic_xz_logits(d, x, z)); }

SganNetworks SganNetworks::clone() const {
  return {generator.clone(), inference.clone(), classifier.clone(), critic_xy.clone(), critic_xz.clone()};
}

SganNetworks build_sgan(const ModelConfig& model, std::uint64_t seed) {
  const LatentDims& d = model.dims;
  return {
      build_network(default_spec(Role::kGenerator, d, model.generator_hidden, model.generator_head), seed * 8 + 1),
      build_network(default_spec(Role::kInference, d, model.inference_hidden), seed * 8 + 2),
      build_network(default_spec(Role::kClassifier, d, model.classifier_hidden), seed * 8 + 3),
      build_network(default_spec(Role::kCriticXY, d, model.critic_hidden), seed * 8 + 4),
      build_network(default_spec(Role::kCriticXZ, d, model.critic_hidden), seed * 8 + 5),
  };
}

Matrix one_hot(const std::vector<int>& labels, Index classes) {
  Matrix m = Matrix::Zero(static_cast<Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw std::out_of_range("one_hot: label " + std::to_string(labels[i]) + " outside [0, " +
                              std::to_string(classes) + ")");
    }
    m(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return m;
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) {
    Index best = 0;
    m.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace sgan
