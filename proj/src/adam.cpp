#include "sgan/adam.hpp"

namespace sgan {

AdamState::AdamState(std::span<const Tensor> params, AdamOptions opts) : options(opts) {
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const Tensor& p : params) {
    first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void adam_step(std::span<Tensor> params, std::span<const Matrix> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " params, " + std::to_string(grads.size()) +
                     " grads, " + std::to_string(state.first_moment.size()) + " moment buffers");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Shape shape = params[i].shape();
    if (shape != Shape{grads[i].rows(), grads[i].cols()} ||
        shape != Shape{state.first_moment[i].rows(), state.first_moment[i].cols()}) {
      throw ShapeError("adam_step: parameter " + std::to_string(i) + " " + shape_string(shape) +
                       " vs gradient " + shape_string({grads[i].rows(), grads[i].cols()}));
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& value = params[i].mutable_value();
    adam_update(grads[i], state.first_moment[i], state.second_moment[i], value, state.step, state.options);
    if (!value.allFinite()) throw NumericError("adam_step: parameter " + std::to_string(i) + " became non-finite");
  }
}

Adam::Adam(std::vector<Tensor> params, AdamOptions opts)
    : params_(std::move(params)), state_(params_, opts) {}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

void Adam::step() {
  std::vector<Matrix> grads;
  grads.reserve(params_.size());
  for (const Tensor& p : params_) grads.push_back(p.grad());
  adam_step(params_, grads, state_);
}

}  // namespace sgan
