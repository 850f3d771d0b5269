#pragma once

#include "sgan/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace sgan {

struct AdamOptions {
  Scalar learning_rate = 2e-4;
  Scalar beta1 = 0.5;
  Scalar beta2 = 0.999;
  Scalar epsilon = 1e-8;
};

// One bias-corrected Adam update of `param` at step t (t >= 1).
template <typename Grad, typename Moment, typename Param>
void adam_update(const Eigen::MatrixBase<Grad>& grad, Eigen::MatrixBase<Moment>& mom1,
                 Eigen::MatrixBase<Moment>& mom2, Eigen::MatrixBase<Param>& param, std::int64_t t,
                 const AdamOptions& opts) {
  mom1 = opts.beta1 * mom1 + (1 - opts.beta1) * grad;
  mom2 = opts.beta2 * mom2 + (1 - opts.beta2) * grad.cwiseProduct(grad);
  const Scalar mom1_corr = 1 - std::pow(opts.beta1, static_cast<Scalar>(t));
  const Scalar mom2_corr = 1 - std::pow(opts.beta2, static_cast<Scalar>(t));
  param.array() -= opts.learning_rate * (mom1.array() / mom1_corr) /
                   ((mom2.array() / mom2_corr).sqrt() + opts.epsilon);
}

struct AdamState {
  AdamOptions options;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(std::span<const Tensor> params, AdamOptions opts);
};

/// Applies one update to every parameter from the matching gradient.
/// Throws ShapeError if any gradient or moment buffer disagrees with its parameter.
void adam_step(std::span<Tensor> params, std::span<const Matrix> grads, AdamState& state);

/// Adam bound to a fixed parameter list, reading gradients from the tensors themselves.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Tensor> params, AdamOptions opts);

  void zero_grad();
  void step();

  std::int64_t step_count() const { return state_.step; }
  const AdamState& state() const { return state_; }
  const AdamOptions& options() const { return state_.options; }

 private:
  std::vector<Tensor> params_;
  AdamState state_;
};

}  // namespace sgan
