#pragma once

// Hand-built networks with known closed forms, shared by unit and acceptance tests.

#include "sgan/networks.hpp"

namespace sgan::testing {

// Network whose ReLU hidden layer realizes the linear map `in -> in * m` exactly
// via relu(v) - relu(-v) = v.
inline Network exact_linear_network(NetworkSpec spec, const Matrix& m) {
  const Index in = m.rows(), out = m.cols();
  spec.hidden = {2 * out};
  spec.activations = {Activation::kRelu};
  NetworkParams params;
  Matrix w0(in, 2 * out);
  w0 << m, -m;
  Matrix w1(2 * out, out);
  w1 << Matrix::Identity(out, out), -Matrix::Identity(out, out);
  params.tensors = {{"W0", Tensor(w0, true)},
                    {"b0", Tensor(Matrix::Zero(1, 2 * out), true)},
                    {"W1", Tensor(w1, true)},
                    {"b1", Tensor(Matrix::Zero(1, out), true)}};
  return Network(spec, params);
}

struct InvertiblePair {
  Network generator;  // x = [z A^T, y b]
  Network inference;  // I(x) = x[:, :2] A^{-T}
  LatentDims dims;
};

// Toy G that is linear and invertible in z (z_dim = 2, x_dim = 3), with I its exact inverse on z.
inline InvertiblePair invertible_pair(Index classes = 3) {
  InvertiblePair p;
  p.dims = LatentDims{3, classes, 2};
  Matrix a(2, 2);
  a << 2.0, 0.5, -1.0, 1.5;
  // G input row is [y, z]; output row is [z A^T, y . b].
  Matrix g(classes + 2, 3);
  g.setZero();
  for (Index k = 0; k < classes; ++k) g(k, 2) = 0.25 * static_cast<Scalar>(k + 1);
  g.block(classes, 0, 2, 2) = a.transpose();
  p.generator = exact_linear_network(default_spec(Role::kGenerator, p.dims), g);
  Matrix inv(3, 2);
  inv.setZero();
  inv.topRows(2) = a.transpose().inverse();
  p.inference = exact_linear_network(default_spec(Role::kInference, p.dims), inv);
  return p;
}

}  // namespace sgan::testing
