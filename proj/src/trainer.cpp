#include "sgan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sgan {

int TrainConfig::resolved_ramp_end() const {
  return ramp_end >= 0 ? ramp_end : static_cast<int>(std::lround(0.6 * epochs));
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("train config: " + msg); };
  if (epochs < 0) fail("epochs must be >= 0");
  if (critic_steps < 1) fail("critic_steps (K) must be >= 1");
  if (batch_size <= 0 || batch_size % 4 != 0) fail("batch_size must be a positive multiple of 4");
  for (Scalar lr : {learning_rates.generator, learning_rates.inference, learning_rates.classifier,
                    learning_rates.critic_xy, learning_rates.critic_xz, pretrain_learning_rate}) {
    if (!(lr > 0)) fail("learning rates must be > 0");
  }
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) fail("Adam betas must lie in [0, 1)");
  if (pretrain_epochs < 0) fail("pretrain_epochs must be >= 0");
  if (!(p_gen >= 0 && p_pseudo >= 0 && p_gen + p_pseudo <= 0.75)) {
    fail("mixing portions need p_gen, p_pseudo >= 0 and p_gen + p_pseudo <= 0.75");
  }
  if (ramp_start < 0) fail("ramp_start must be >= 0");
  priors.validate();
}

MixingPortions mixing_schedule(int epoch, const TrainConfig& config) {
  const int start = config.ramp_start;
  const int end = config.resolved_ramp_end();
  Scalar t = 0;
  if (epoch >= end && epoch >= start) {
    t = 1;
  } else if (epoch > start) {
    t = static_cast<Scalar>(epoch - start) / static_cast<Scalar>(end - start);
  }
  MixingPortions out;
  out.generated = t * config.p_gen;
  out.pseudo = t * config.p_pseudo;
  out.labeled = 1.0 - out.generated - out.pseudo;
  return out;
}

GeneratedBatch sample_generated(const Network& generator, const PriorSpec& priors, Index batch_size,
                                std::mt19937_64& rng) {
  GeneratedBatch out;
  out.labels = sample_classes(priors, batch_size, rng);
  out.y = one_hot(out.labels, priors.classes);
  out.z = sample_z(priors, batch_size, rng);
  out.x = generator_forward(generator.frozen(), Tensor(out.y), Tensor(out.z)).value();
  return out;
}

PairBatch sample_pseudo_labeled(const Network& classifier, const Matrix& x_unlabeled, std::mt19937_64& rng) {
  const Matrix probs = classifier.frozen().forward(Tensor(x_unlabeled)).value();
  std::uniform_real_distribution<Scalar> unit(0.0, 1.0);
  std::vector<int> labels(static_cast<std::size_t>(probs.rows()));
  for (Index r = 0; r < probs.rows(); ++r) {
    const Scalar u = unit(rng);
    Scalar cumulative = 0;
    int pick = static_cast<int>(probs.cols()) - 1;
    for (Index k = 0; k < probs.cols(); ++k) {
      cumulative += probs(r, k);
      if (u < cumulative) {
        pick = static_cast<int>(k);
        break;
      }
    }
    // Guard the rounding tail: never pick a zero-probability class.
    while (pick > 0 && probs(r, pick) == 0.0) --pick;
    labels[static_cast<std::size_t>(r)] = pick;
  }
  return {x_unlabeled, one_hot(labels, probs.cols())};
}

PairBatch mix_batch(const PairBatch& labeled_pool, const PairBatch& generated, const PairBatch& pseudo,
                    const MixingPortions& portions, Index batch_size, std::mt19937_64& rng) {
  const Index n_gen = std::lround(portions.generated * static_cast<Scalar>(batch_size));
  const Index n_pseudo = std::lround(portions.pseudo * static_cast<Scalar>(batch_size));
  const Index n_label = batch_size - n_gen - n_pseudo;
  if (n_label < 0) throw std::invalid_argument("mix_batch: portions exceed the batch");
  if (n_label > 0 && labeled_pool.x.rows() == 0) throw std::invalid_argument("mix_batch: labeled pool is empty");
  if (n_gen > generated.x.rows()) throw std::invalid_argument("mix_batch: not enough generated rows");
  if (n_pseudo > pseudo.x.rows()) throw std::invalid_argument("mix_batch: not enough pseudo-labeled rows");

  const Index x_dim = n_label > 0 ? labeled_pool.x.cols() : (n_gen > 0 ? generated.x.cols() : pseudo.x.cols());
  const Index y_dim = n_label > 0 ? labeled_pool.y.cols() : (n_gen > 0 ? generated.y.cols() : pseudo.y.cols());
  PairBatch mixed{Matrix(batch_size, x_dim), Matrix(batch_size, y_dim)};
  Index row = 0;

  const Index pool = labeled_pool.x.rows();
  std::vector<Index> picks;
  if (pool >= n_label) {
    std::vector<Index> idx(static_cast<std::size_t>(pool));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    picks.assign(idx.begin(), idx.begin() + n_label);
  } else {
    std::uniform_int_distribution<Index> pick(0, pool - 1);
    for (Index i = 0; i < n_label; ++i) picks.push_back(pick(rng));
  }
  for (Index src : picks) {
    mixed.x.row(row) = labeled_pool.x.row(src);
    mixed.y.row(row++) = labeled_pool.y.row(src);
  }
  for (Index i = 0; i < n_gen; ++i) {
    mixed.x.row(row) = generated.x.row(i);
    mixed.y.row(row++) = generated.y.row(i);
  }
  for (Index i = 0; i < n_pseudo; ++i) {
    mixed.x.row(row) = pseudo.x.row(i);
    mixed.y.row(row++) = pseudo.y.row(i);
  }

  std::vector<Index> order(static_cast<std::size_t>(batch_size));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  PairBatch out{Matrix(batch_size, x_dim), Matrix(batch_size, y_dim)};
  for (Index i = 0; i < batch_size; ++i) {
    out.x.row(i) = mixed.x.row(order[static_cast<std::size_t>(i)]);
    out.y.row(i) = mixed.y.row(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

PairBatch sample_rows(const PairBatch& pool, Index n, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> pick(0, pool.x.rows() - 1);
  PairBatch out{Matrix(n, pool.x.cols()), Matrix(n, pool.y.cols())};
  for (Index i = 0; i < n; ++i) {
    const Index src = pick(rng);
    out.x.row(i) = pool.x.row(src);
    out.y.row(i) = pool.y.row(src);
  }
  return out;
}

AdamOptions adam_options(Scalar lr, const TrainConfig& config) {
  AdamOptions o;
  o.learning_rate = lr;
  o.beta1 = config.beta1;
  o.beta2 = config.beta2;
  return o;
}

// Evaluates one game loss, turning numeric failures into a diagnostic.
template <typename Fn>
Tensor checked(const char* game, Fn&& fn) {
  try {
    Tensor loss = fn();
    if (!std::isfinite(loss.item())) throw NumericError("non-finite loss");
    return loss;
  } catch (const NumericError& e) {
    throw TrainingDiverged(std::string(game) + ": " + e.what());
  }
}

void finish_update(Adam& opt, Network& net, const Tensor& loss, const char* game,
                   const SganTrainer::SubstepObserver& observer) {
  opt.zero_grad();
  backward(loss);
  try {
    opt.step();
  } catch (const NumericError& e) {
    throw TrainingDiverged(std::string(game) + ": " + e.what());
  }
  if (!net.params().all_finite()) throw TrainingDiverged(std::string(game) + ": parameters became non-finite");
  if (observer) observer(game);
}

}  // namespace

Scalar pretrain_classifier(Network& classifier, const Matrix& x, const std::vector<int>& y, int epochs,
                           Scalar learning_rate, Index batch_size, std::uint64_t seed) {
  if (x.rows() == 0) throw std::invalid_argument("pretrain_classifier: labeled set is empty");
  const Index classes = classifier.spec().dims.y_dim;
  const Matrix targets = one_hot(y, classes);
  AdamOptions opts;
  opts.learning_rate = learning_rate;
  opts.beta1 = 0.9;
  Adam adam(classifier.params().list(), opts);
  std::mt19937_64 rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  const Index batch = std::min(batch_size, x.rows());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Index start = 0; start + batch <= x.rows(); start += batch) {
      Matrix xb(batch, x.cols()), yb(batch, classes);
      for (Index i = 0; i < batch; ++i) {
        xb.row(i) = x.row(order[static_cast<std::size_t>(start + i)]);
        yb.row(i) = targets.row(order[static_cast<std::size_t>(start + i)]);
      }
      adam.zero_grad();
      backward(cross_entropy_with_logits(classifier.logits(Tensor(std::move(xb))), Tensor(std::move(yb))));
      adam.step();
    }
  }
  const Network frozen = classifier.frozen();
  return cross_entropy_with_logits(frozen.logits(Tensor(x)), Tensor(targets)).item();
}

SganTrainer::SganTrainer(SganNetworks& nets, const TrainConfig& config)
    : nets_(nets),
      config_(config),
      generator_opt_(nets.generator.params().list(), adam_options(config.learning_rates.generator, config)),
      inference_opt_(nets.inference.params().list(), adam_options(config.learning_rates.inference, config)),
      classifier_opt_(nets.classifier.params().list(), adam_options(config.learning_rates.classifier, config)),
      critic_xy_opt_(nets.critic_xy.params().list(), adam_options(config.learning_rates.critic_xy, config)),
      critic_xz_opt_(nets.critic_xz.params().list(), adam_options(config.learning_rates.critic_xz, config)) {
  config_.validate();
}

UpdateCounters SganTrainer::counters() const {
  return {generator_opt_.step_count(), inference_opt_.step_count(), classifier_opt_.step_count(),
          critic_xy_opt_.step_count(), critic_xz_opt_.step_count()};
}

GameLossReport SganTrainer::train_step(const Matrix& x_unlabeled, const PairBatch& labeled_pool, int epoch,
                                       std::mt19937_64& rng) {
  try {
    return train_step_impl(x_unlabeled, labeled_pool, epoch, rng);
  } catch (const NumericError& e) {
    throw TrainingDiverged("step " + std::to_string(steps_) + ": " + e.what());
  }
}

GameLossReport SganTrainer::train_step_impl(const Matrix& x_unlabeled, const PairBatch& labeled_pool, int epoch,
                                            std::mt19937_64& rng) {
  const TrainConfig& cfg = config_;
  const Index batch = x_unlabeled.rows();
  const GeneratorLoss form = cfg.saturating_gen_loss ? GeneratorLoss::kSaturating : GeneratorLoss::kNonSaturating;
  GameLossReport report;
  report.step = ++steps_;

  // Sampling: the fake tuple shared by all four games, then the mixed real batch for L_xy.
  const GeneratedBatch fake = sample_generated(nets_.generator, cfg.priors, batch, rng);
  const MixingPortions portions = mixing_schedule(epoch, cfg);
  const GeneratedBatch extra = sample_generated(nets_.generator, cfg.priors, batch, rng);
  const PairBatch pseudo = sample_pseudo_labeled(nets_.classifier, x_unlabeled, rng);
  const PairBatch mixed = mix_batch(labeled_pool, {extra.x, extra.y}, pseudo, portions, batch, rng);
  const PairBatch labeled = sample_rows(labeled_pool, batch, rng);

  const Tensor x_u(x_unlabeled);
  const Tensor x_g_const(fake.x), y_g(fake.y), z_g(fake.z);
  const Tensor x_m(mixed.x), y_m(mixed.y);

  for (int k = 0; k < cfg.critic_steps; ++k) {
    const Tensor z_inferred = detach(infer_z(nets_.inference.frozen(), x_u));
    Tensor l_xz = checked("L_xz critic step",
                          [&] { return loss_xz_critic(nets_.critic_xz, x_u, z_inferred, x_g_const, z_g); });
    finish_update(critic_xz_opt_, nets_.critic_xz, l_xz, "L_xz critic step", observer_);
    report.l_xz_critic = l_xz.item();

    Tensor l_xy = checked("L_xy critic step",
                          [&] { return loss_xy_critic(nets_.critic_xy, x_m, y_m, x_g_const, y_g); });
    finish_update(critic_xy_opt_, nets_.critic_xy, l_xy, "L_xy critic step", observer_);
    report.l_xy_critic = l_xy.item();
  }

  // I step: adversarial L_xz through I(x_u) plus R_z on generated samples.
  {
    Tensor loss = checked("L_xz inference step", [&] {
      return loss_xz_geninf(nets_.critic_xz, x_u, infer_z(nets_.inference, x_u), x_g_const, z_g, form);
    });
    if (cfg.use_rz) loss = loss + checked("R_z inference step", [&] { return loss_rz(nets_.inference, x_g_const, z_g); });
    finish_update(inference_opt_, nets_.inference, loss, "I step", observer_);
  }

  // C step: labeled term always; generated term once C joins.
  {
    Tensor x_l(labeled.x), y_l(labeled.y);
    if (cfg.pseudo_in_ry && portions.pseudo > 0) {
      Matrix xs(labeled.x.rows() + pseudo.x.rows(), labeled.x.cols());
      Matrix ys(labeled.y.rows() + pseudo.y.rows(), labeled.y.cols());
      xs << labeled.x, pseudo.x;
      ys << labeled.y, pseudo.y;
      x_l = Tensor(std::move(xs));
      y_l = Tensor(std::move(ys));
    }
    RyTerms terms;
    terms.generated = cfg.use_ry && epoch >= cfg.c_join_epoch;
    Tensor loss = checked("R_y classifier step",
                          [&] { return loss_ry(nets_.classifier, x_l, y_l, x_g_const, y_g, terms); });
    finish_update(classifier_opt_, nets_.classifier, loss, "C step", observer_);
  }

  // G step: equally weighted L_xy + L_xz + R_y + R_z through x_g = G(y_g, z).
  {
    const Tensor x_g = generator_forward(nets_.generator, y_g, z_g);
    const Tensor z_inferred = detach(infer_z(nets_.inference.frozen(), x_u));
    Tensor l_xy = checked("L_xy generator step", [&] { return loss_xy_gen(nets_.critic_xy, x_g, y_g, form); });
    Tensor l_xz = checked("L_xz generator step",
                          [&] { return loss_xz_geninf(nets_.critic_xz, x_u, z_inferred, x_g, z_g, form); });
    Tensor loss = l_xy + l_xz;
    const Network c_frozen = nets_.classifier.frozen();
    const Network i_frozen = nets_.inference.frozen();
    RyTerms generated_only{false, true};
    Tensor r_y = checked("R_y generator step", [&] { return loss_ry(c_frozen, x_g, y_g, x_g, y_g, generated_only); });
    Tensor r_z = checked("R_z generator step", [&] { return loss_rz(i_frozen, x_g, z_g); });
    if (cfg.use_ry) loss = loss + r_y;
    if (cfg.use_rz) loss = loss + r_z;
    report.l_xy_gen = l_xy.item();
    report.l_xz_geninf = l_xz.item();
    report.r_z = r_z.item();
    const Scalar labeled_term =
        cross_entropy_with_logits(c_frozen.logits(Tensor(labeled.x)), Tensor(labeled.y)).item();
    report.r_y = labeled_term + r_y.item();
    finish_update(generator_opt_, nets_.generator, loss, "G step", observer_);
  }

  if (!report.all_finite()) throw TrainingDiverged("step " + std::to_string(report.step) + ": non-finite loss report");
  return report;
}

TrainResult train(SganNetworks& nets, const DatasetSplit& data, const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  if (data.unlabeled_x.rows() < config.batch_size) {
    throw std::invalid_argument("train: unlabeled pool smaller than one batch");
  }
  TrainResult result;
  result.pretrain_loss = pretrain_classifier(nets.classifier, data.labeled_x, data.labeled_y, config.pretrain_epochs,
                                             config.pretrain_learning_rate, config.batch_size, config.seed);

  SganTrainer trainer(nets, config);
  std::mt19937_64 rng(config.seed);
  const PairBatch labeled_pool{data.labeled_x, one_hot(data.labeled_y, data.classes)};
  const Index n = data.unlabeled_x.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const Index batch = config.batch_size;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    GameLossReport total;
    Index steps = 0;
    for (Index start = 0; start + batch <= n; start += batch) {
      Matrix x_u(batch, data.x_dim);
      for (Index i = 0; i < batch; ++i) x_u.row(i) = data.unlabeled_x.row(order[static_cast<std::size_t>(start + i)]);
      total += trainer.train_step(x_u, labeled_pool, epoch, rng);
      ++steps;
    }
    total /= static_cast<Scalar>(std::max<Index>(steps, 1));
    total.step = static_cast<std::int64_t>(epoch + 1);

    MetricsRecord record = hooks.evaluate ? hooks.evaluate(epoch + 1, nets) : MetricsRecord{};
    record.epoch = epoch + 1;
    record.losses = total;
    result.history.push_back(record);
    if (hooks.on_epoch_end) hooks.on_epoch_end(record, nets);
  }
  result.counters = trainer.counters();
  return result;
}

}  // namespace sgan
