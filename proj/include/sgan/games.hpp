#pragma once

// The four SGAN objectives. Adversarial games L_xz and L_xy are split into a
// critic side (minimized by the critic, i.e. the negated value) and a
// generator/inference side. Collaborative games R_y and R_z are plain
// reconstruction losses.
//
// Stop-gradient boundaries are enforced here: critic-side losses detach every
// network output they consume, and generator-side losses evaluate a frozen
// copy of the critic.

#include "sgan/networks.hpp"
#include "sgan/tensor.hpp"

#include <cstdint>
#include <vector>

namespace sgan {

struct GameLossReport {
  std::int64_t step = 0;
  Scalar l_xz_critic = 0;
  Scalar l_xz_geninf = 0;
  Scalar l_xy_critic = 0;
  Scalar l_xy_gen = 0;
  Scalar r_y = 0;
  Scalar r_z = 0;

  bool all_finite() const;
  // Elementwise accumulate, used for epoch means.
  GameLossReport& operator+=(const GameLossReport& other);
  GameLossReport& operator/=(Scalar n);
};

enum class GeneratorLoss {
  kNonSaturating,  // -log D(fake)
  kSaturating,     // +log(1 - D(fake)), the literal minimax form
};

// -[mean log Dxz(x_real, z_inferred) + mean log(1 - Dxz(x_fake, z_fake))]
Tensor loss_xz_critic(const Network& dxz, const Tensor& x_real, const Tensor& z_inferred, const Tensor& x_fake,
                      const Tensor& z_fake);

// Non-saturating: -mean log Dxz(x_fake, z_fake) - mean log(1 - Dxz(x_real, z_inferred)).
// Gradients reach z_inferred (I) and x_fake (G); never the critic.
Tensor loss_xz_geninf(const Network& dxz, const Tensor& x_real, const Tensor& z_inferred, const Tensor& x_fake,
                      const Tensor& z_fake, GeneratorLoss form = GeneratorLoss::kNonSaturating);

Tensor loss_xy_critic(const Network& dxy, const Tensor& x_real, const Tensor& y_real, const Tensor& x_fake,
                      const Tensor& y_fake);

// Non-saturating: -mean log Dxy(x_fake, y_fake).
Tensor loss_xy_gen(const Network& dxy, const Tensor& x_fake, const Tensor& y_fake,
                   GeneratorLoss form = GeneratorLoss::kNonSaturating);

struct RyTerms {
  bool labeled = true;
  bool generated = true;
};

// mean CE(C(x_l), y_l) + mean CE(C(x_g), y_g); either term may be switched off.
Tensor loss_ry(const Network& c, const Tensor& x_labeled, const Tensor& y_labeled, const Tensor& x_generated,
               const Tensor& y_generated, RyTerms terms = {});

// mean over batch and z dimensions of (I(x_g) - z)^2
Tensor loss_rz(const Network& i, const Tensor& x_generated, const Tensor& z);

struct DiscreteDistPair {
  std::vector<Scalar> p;
  std::vector<Scalar> q;

  // Throws std::invalid_argument unless both are distributions on the same support.
  void validate() const;
};

struct OptimalCritic {
  std::vector<Scalar> d_star;
  Scalar value = 0;
};

/// D*_i = P_i / (P_i + Q_i) (0 where both vanish) and the attained value
/// sum P log D* + sum Q log(1 - D*), with 0 log 0 = 0.
OptimalCritic optimal_critic_reference(const DiscreteDistPair& pair);

/// Value sum P log D + sum Q log(1 - D) of an arbitrary tabular critic.
Scalar critic_objective(const DiscreteDistPair& pair, const std::vector<Scalar>& d);

/// Trains a tabular critic (one logit per support point) by Adam on the exact
/// expectation of the critic-side loss. Returns the learned D per point.
/// Logits start at `initial_logits` when given, else at 0.
std::vector<Scalar> fit_tabular_critic(const DiscreteDistPair& pair, int steps = 3000, Scalar learning_rate = 0.05,
                                       const std::vector<Scalar>& initial_logits = {});

}  // namespace sgan
