#include "sgan/games.hpp"

#include "sgan/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sgan {

bool GameLossReport::all_finite() const {
  return std::isfinite(l_xz_critic) && std::isfinite(l_xz_geninf) && std::isfinite(l_xy_critic) &&
         std::isfinite(l_xy_gen) && std::isfinite(r_y) && std::isfinite(r_z);
}

GameLossReport& GameLossReport::operator+=(const GameLossReport& o) {
  l_xz_critic += o.l_xz_critic;
  l_xz_geninf += o.l_xz_geninf;
  l_xy_critic += o.l_xy_critic;
  l_xy_gen += o.l_xy_gen;
  r_y += o.r_y;
  r_z += o.r_z;
  return *this;
}

GameLossReport& GameLossReport::operator/=(Scalar n) {
  l_xz_critic /= n;
  l_xz_geninf /= n;
  l_xy_critic /= n;
  l_xy_gen /= n;
  r_y /= n;
  r_z /= n;
  return *this;
}

namespace {

void require_batch(const char* who, const Tensor& t) {
  if (t.rows() == 0) throw std::invalid_argument(std::string(who) + ": empty batch");
}

// mean log D and mean log(1 - D) from critic logits.
Tensor mean_log_d(const Tensor& logits) { return mean(log_sigmoid(logits)); }
Tensor mean_log_one_minus_d(const Tensor& logits) { return mean(log_sigmoid(-logits)); }

}  // namespace

Tensor loss_xz_critic(const Network& dxz, const Tensor& x_real, const Tensor& z_inferred, const Tensor& x_fake,
                      const Tensor& z_fake) {
  require_batch("loss_xz_critic", x_real);
  require_batch("loss_xz_critic", x_fake);
  const Tensor real = critic_xz_logits(dxz, detach(x_real), detach(z_inferred));
  const Tensor fake = critic_xz_logits(dxz, detach(x_fake), detach(z_fake));
  return -(mean_log_d(real) + mean_log_one_minus_d(fake));
}

Tensor loss_xz_geninf(const Network& dxz, const Tensor& x_real, const Tensor& z_inferred, const Tensor& x_fake,
                      const Tensor& z_fake, GeneratorLoss form) {
  require_batch("loss_xz_geninf", x_real);
  require_batch("loss_xz_geninf", x_fake);
  const Network critic = dxz.frozen();
  const Tensor real = critic_xz_logits(critic, x_real, z_inferred);
  const Tensor fake = critic_xz_logits(critic, x_fake, z_fake);
  if (form == GeneratorLoss::kSaturating) return mean_log_d(real) + mean_log_one_minus_d(fake);
  return -(mean_log_d(fake) + mean_log_one_minus_d(real));
}

Tensor loss_xy_critic(const Network& dxy, const Tensor& x_real, const Tensor& y_real, const Tensor& x_fake,
                      const Tensor& y_fake) {
  require_batch("loss_xy_critic", x_real);
  require_batch("loss_xy_critic", x_fake);
  const Tensor real = critic_xy_logits(dxy, detach(x_real), detach(y_real));
  const Tensor fake = critic_xy_logits(dxy, detach(x_fake), detach(y_fake));
  return -(mean_log_d(real) + mean_log_one_minus_d(fake));
}

Tensor loss_xy_gen(const Network& dxy, const Tensor& x_fake, const Tensor& y_fake, GeneratorLoss form) {
  require_batch("loss_xy_gen", x_fake);
  const Tensor fake = critic_xy_logits(dxy.frozen(), x_fake, y_fake);
  if (form == GeneratorLoss::kSaturating) return mean_log_one_minus_d(fake);
  return -mean_log_d(fake);
}

Tensor loss_ry(const Network& c, const Tensor& x_labeled, const Tensor& y_labeled, const Tensor& x_generated,
               const Tensor& y_generated, RyTerms terms) {
  if (!terms.labeled && !terms.generated) throw std::invalid_argument("loss_ry: no term requested");
  Tensor total;
  bool have = false;
  if (terms.labeled) {
    require_batch("loss_ry (labeled term)", x_labeled);
    total = cross_entropy_with_logits(classifier_logits(c, x_labeled), y_labeled);
    have = true;
  }
  if (terms.generated) {
    require_batch("loss_ry (generated term)", x_generated);
    Tensor gen = cross_entropy_with_logits(classifier_logits(c, x_generated), y_generated);
    total = have ? total + gen : gen;
  }
  return total;
}

Tensor loss_rz(const Network& i, const Tensor& x_generated, const Tensor& z) {
  require_batch("loss_rz", x_generated);
  if (z.cols() != i.spec().dims.z_dim || z.rows() != x_generated.rows()) {
    throw ShapeError("loss_rz: z " + shape_string(z.shape()) + " does not match batch " +
                     std::to_string(x_generated.rows()) + " x z_dim " + std::to_string(i.spec().dims.z_dim));
  }
  return squared_error(infer_z(i, x_generated), z);
}

void DiscreteDistPair::validate() const {
  if (p.empty() || p.size() != q.size()) throw std::invalid_argument("DiscreteDistPair: supports differ or empty");
  for (const auto* dist : {&p, &q}) {
    Scalar total = 0;
    for (Scalar v : *dist) {
      if (!(v >= 0)) throw std::invalid_argument("DiscreteDistPair: negative probability");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("DiscreteDistPair: probabilities do not sum to 1");
  }
}

namespace {

Scalar xlogy(Scalar x, Scalar y) { return x == 0 ? 0.0 : x * std::log(y); }

}  // namespace

Scalar critic_objective(const DiscreteDistPair& pair, const std::vector<Scalar>& d) {
  pair.validate();
  if (d.size() != pair.p.size()) throw std::invalid_argument("critic_objective: critic table size mismatch");
  Scalar value = 0;
  for (std::size_t i = 0; i < d.size(); ++i) value += xlogy(pair.p[i], d[i]) + xlogy(pair.q[i], 1.0 - d[i]);
  return value;
}

OptimalCritic optimal_critic_reference(const DiscreteDistPair& pair) {
  pair.validate();
  OptimalCritic out;
  out.d_star.resize(pair.p.size());
  for (std::size_t i = 0; i < pair.p.size(); ++i) {
    const Scalar denom = pair.p[i] + pair.q[i];
    out.d_star[i] = denom > 0 ? pair.p[i] / denom : 0.0;
  }
  out.value = critic_objective(pair, out.d_star);
  return out;
}

std::vector<Scalar> fit_tabular_critic(const DiscreteDistPair& pair, int steps, Scalar learning_rate,
                                       const std::vector<Scalar>& initial_logits) {
  pair.validate();
  const Index m = static_cast<Index>(pair.p.size());
  Tensor table = Tensor::zeros(1, m, true);
  if (!initial_logits.empty()) {
    if (static_cast<Index>(initial_logits.size()) != m) {
      throw std::invalid_argument("fit_tabular_critic: initial_logits size differs from the support");
    }
    for (Index i = 0; i < m; ++i) table.mutable_value()(0, i) = initial_logits[static_cast<std::size_t>(i)];
  }
  Matrix p(1, m), q(1, m);
  for (Index i = 0; i < m; ++i) {
    p(0, i) = pair.p[static_cast<std::size_t>(i)];
    q(0, i) = pair.q[static_cast<std::size_t>(i)];
  }
  const Tensor pw(p), qw(q);
  AdamOptions opts;
  opts.learning_rate = learning_rate;
  opts.beta1 = 0.9;
  Adam adam({table}, opts);
  for (int s = 0; s < steps; ++s) {
    adam.zero_grad();
    Tensor loss = -(sum(mul(pw, log_sigmoid(table))) + sum(mul(qw, log_sigmoid(-table))));
    backward(loss);
    adam.step();
  }
  const Matrix d = sigmoid(table).value();
  return {d.data(), d.data() + d.size()};
}

}  // namespace sgan
