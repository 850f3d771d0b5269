#pragma once

// Alternating SGAN training: classifier pretraining, then per batch K critic
// updates followed by one update each of I, C and G.

#include "sgan/adam.hpp"
#include "sgan/data.hpp"
#include "sgan/eval.hpp"
#include "sgan/games.hpp"
#include "sgan/networks.hpp"
#include "sgan/priors.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace sgan {

/// A game produced a non-finite loss; the message names the game and sub-step.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LearningRates {
  Scalar generator = 2e-4;
  Scalar inference = 2e-4;
  Scalar classifier = 2e-4;
  Scalar critic_xy = 2e-4;
  Scalar critic_xz = 2e-4;
};

struct TrainConfig {
  int epochs = 200;
  Index batch_size = 64;
  int critic_steps = 1;  // K
  LearningRates learning_rates;
  Scalar beta1 = 0.5;
  Scalar beta2 = 0.999;

  int pretrain_epochs = 300;
  Scalar pretrain_learning_rate = 1e-3;
  int c_join_epoch = 3;

  // Mixing ramp: (1, 0, 0) before ramp_start, (1 - p_gen - p_pseudo, p_gen,
  // p_pseudo) from ramp_end on, linear in between. ramp_end < 0 means 60% of epochs.
  int ramp_start = 3;
  int ramp_end = -1;
  Scalar p_gen = 0.5;
  Scalar p_pseudo = 0.25;

  bool saturating_gen_loss = false;
  bool pseudo_in_ry = false;
  // Collaborative games; switching both off gives the "w/o R_y, R_z" ablation.
  bool use_ry = true;
  bool use_rz = true;

  PriorSpec priors;
  std::uint64_t seed = 3;

  int resolved_ramp_end() const;
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct MixingPortions {
  Scalar labeled = 1;
  Scalar generated = 0;
  Scalar pseudo = 0;
};

MixingPortions mixing_schedule(int epoch, const TrainConfig& config);

struct PairBatch {
  Matrix x;
  Matrix y;  // one-hot
};

struct GeneratedBatch {
  Matrix x;
  Matrix y;  // one-hot condition
  Matrix z;
  std::vector<int> labels;
};

GeneratedBatch sample_generated(const Network& generator, const PriorSpec& priors, Index batch_size,
                                std::mt19937_64& rng);

/// y_c drawn from the categorical C(x_u) per row; x_c is x_u unchanged.
PairBatch sample_pseudo_labeled(const Network& classifier, const Matrix& x_unlabeled, std::mt19937_64& rng);

/// round(portion * batch_size) generated and pseudo rows, remainder labeled
/// (drawn with replacement when the pool is smaller than needed), shuffled.
PairBatch mix_batch(const PairBatch& labeled_pool, const PairBatch& generated, const PairBatch& pseudo,
                    const MixingPortions& portions, Index batch_size, std::mt19937_64& rng);

/// Supervised cross-entropy on the labeled set only. Returns the final loss.
Scalar pretrain_classifier(Network& classifier, const Matrix& x, const std::vector<int>& y, int epochs,
                           Scalar learning_rate, Index batch_size, std::uint64_t seed);

struct UpdateCounters {
  std::int64_t generator = 0;
  std::int64_t inference = 0;
  std::int64_t classifier = 0;
  std::int64_t critic_xy = 0;
  std::int64_t critic_xz = 0;
};

/// Optimizer state for one training run over a fixed set of networks.
class SganTrainer {
 public:
  SganTrainer(SganNetworks& nets, const TrainConfig& config);

  /// One pass of the loop body on an unlabeled batch x_u at the given epoch.
  GameLossReport train_step(const Matrix& x_unlabeled, const PairBatch& labeled_pool, int epoch,
                            std::mt19937_64& rng);

  UpdateCounters counters() const;
  const TrainConfig& config() const { return config_; }

  // Called after every parameter update with the sub-step's name
  // ("L_xz critic step", "L_xy critic step", "I step", "C step", "G step").
  using SubstepObserver = std::function<void(std::string_view substep)>;
  void set_substep_observer(SubstepObserver observer) { observer_ = std::move(observer); }

 private:
  GameLossReport train_step_impl(const Matrix& x_unlabeled, const PairBatch& labeled_pool, int epoch,
                                 std::mt19937_64& rng);

  SganNetworks& nets_;
  TrainConfig config_;
  Adam generator_opt_, inference_opt_, classifier_opt_, critic_xy_opt_, critic_xz_opt_;
  std::int64_t steps_ = 0;
  SubstepObserver observer_;
};

struct TrainHooks {
  // Metrics for the snapshot after `epoch` (1-based). Loss fields are filled by train().
  std::function<MetricsRecord(int epoch, const SganNetworks&)> evaluate;
  std::function<void(const MetricsRecord&, const SganNetworks&)> on_epoch_end;
};

struct TrainResult {
  std::vector<MetricsRecord> history;
  UpdateCounters counters;
  Scalar pretrain_loss = 0;
};

/// Pretrains C, then runs config.epochs epochs over the shuffled unlabeled pool
/// (partial final batches dropped). history holds one record per epoch with the
/// epoch-mean GameLossReport.
TrainResult train(SganNetworks& nets, const DatasetSplit& data, const TrainConfig& config,
                  const TrainHooks& hooks = {});

}  // namespace sgan
