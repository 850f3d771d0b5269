#pragma once

// The five SGAN players as small MLPs:
//   generator   G   : [y, z] -> x
//   inference   I   : x -> z          (deterministic, linear head)
//   classifier  C   : x -> p(y | x)   (softmax head)
//   critic_xy   Dxy : [x, y] -> (0,1)
//   critic_xz   Dxz : [x, z] -> (0,1)

#include "sgan/tensor.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sgan {

enum class Role { kGenerator, kInference, kClassifier, kCriticXY, kCriticXZ };
enum class Activation { kRelu, kLeakyRelu, kTanh, kSigmoid };
enum class Head { kLinear, kSigmoid, kSoftmax };

std::string_view role_name(Role role);
std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);
std::string_view head_name(Head h);

struct LatentDims {
  Index x_dim = 2;
  Index y_dim = 4;  // number of classes
  Index z_dim = 1;
};

struct NetworkSpec {
  Role role = Role::kGenerator;
  LatentDims dims;
  std::vector<Index> hidden;
  std::vector<Activation> activations;  // one per hidden layer
  Scalar leaky_slope = 0.2;
  Head head = Head::kLinear;

  Index input_width() const;
  Index output_width() const;
  // Throws std::invalid_argument on zero widths or a head the role does not allow.
  void validate() const;
};

// Defaults: relu hidden layers, leaky-relu(0.2) in critics.
NetworkSpec default_spec(Role role, const LatentDims& dims, std::vector<Index> hidden = {64, 64},
                         Head generator_head = Head::kLinear);

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct NetworkParams {
  std::vector<NamedTensor> tensors;  // W0, b0, W1, b1, ...
  std::uint64_t seed = 0;

  std::vector<Tensor> list() const;
  Index count() const;
  // Deep copy; the copy never shares storage with *this.
  NetworkParams clone(bool requires_grad = true) const;
  // FNV-1a over shapes and the raw bytes of every value.
  std::uint64_t hash() const;
  bool all_finite() const;
};

class Network {
 public:
  Network() = default;
  Network(NetworkSpec spec, NetworkParams params);

  const NetworkSpec& spec() const { return spec_; }
  const NetworkParams& params() const { return params_; }
  NetworkParams& params() { return params_; }

  // Pre-head activations of the output layer.
  Tensor logits(const Tensor& input) const;
  // logits followed by the head.
  Tensor forward(const Tensor& input) const;

  Network clone() const;
  // Copy whose parameters are constants: gradients stop at this network.
  Network frozen() const;

 private:
  NetworkSpec spec_;
  NetworkParams params_;
};

/// Glorot-uniform weights, zero biases; a pure function of (spec, seed).
Network build_network(const NetworkSpec& spec, std::uint64_t seed);

// Throws std::invalid_argument unless every row of y is an exact one-hot.
void require_one_hot(const Tensor& y, Index classes, std::string_view who);

Tensor generator_forward(const Network& g, const Tensor& y, const Tensor& z);
Tensor infer_z(const Network& i, const Tensor& x);
Tensor classify(const Network& c, const Tensor& x);
Tensor classifier_logits(const Network& c, const Tensor& x);
Tensor critic_xy(const Network& d, const Tensor& x, const Tensor& y);
Tensor critic_xz(const Network& d, const Tensor& x, const Tensor& z);
Tensor critic_xy_logits(const Network& d, const Tensor& x, const Tensor& y);
Tensor critic_xz_logits(const Network& d, const Tensor& x, const Tensor& z);

struct SganNetworks {
  Network generator;
  Network inference;
  Network classifier;
  Network critic_xy;
  Network critic_xz;

  SganNetworks clone() const;
};

struct ModelConfig {
  LatentDims dims;
  std::vector<Index> generator_hidden{64, 64};
  std::vector<Index> inference_hidden{64, 64};
  std::vector<Index> classifier_hidden{64, 64};
  std::vector<Index> critic_hidden{64, 64};
  Head generator_head = Head::kLinear;
};

SganNetworks build_sgan(const ModelConfig& model, std::uint64_t seed);

// One-hot rows for integer labels.
Matrix one_hot(const std::vector<int>& labels, Index classes);
std::vector<int> argmax_rows(const Matrix& m);

}  // namespace sgan
