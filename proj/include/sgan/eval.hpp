#pragma once

// Evaluation protocols: semi-supervised test error, the MP disentanglement
// probe, golden-classifier conditional accuracy and diversity score, and the
// latent manipulations (style transfer, interpolation).

#include "sgan/data.hpp"
#include "sgan/games.hpp"
#include "sgan/networks.hpp"
#include "sgan/priors.hpp"

#include <cstdint>
#include <vector>

namespace sgan {

struct MetricsRecord {
  int epoch = 0;
  GameLossReport losses;
  Scalar test_error = 0;
  Scalar mp = 0;
  Scalar conditional_accuracy = 0;
  Scalar golden_score = 1;
};

struct GoldenClassifier {
  Network network;
  Scalar test_accuracy = 0;
};

struct GoldenTrainOptions {
  std::vector<Index> hidden{64, 64};
  int epochs = 30;
  Index batch_size = 64;
  Scalar learning_rate = 1e-3;
};

Scalar accuracy(const Network& classifier, const Matrix& x, const std::vector<int>& y);

/// Supervised training of a classifier-architecture network on the whole
/// labeled training set; records held-out accuracy on (test_x, test_y).
GoldenClassifier train_golden_classifier(const LabeledSet& train, const Matrix& test_x,
                                         const std::vector<int>& test_y, Index classes, std::uint64_t seed,
                                         const GoldenTrainOptions& options = {});

struct ProbeOptions {
  int iterations = 400;
  Scalar learning_rate = 0.1;
};

/// Training-set accuracy of a full-batch multinomial logistic regression from
/// `features` to `labels`. Features are standardized per column first.
Scalar linear_probe_accuracy(const Matrix& features, const std::vector<int>& labels, Index classes,
                             const ProbeOptions& options = {});

/// MP: linear-probe predictability of y from I(x). Lower means z carries less class information.
Scalar mp_measure(const Network& inference, const Matrix& x, const std::vector<int>& y, Index classes,
                  const ProbeOptions& options = {});

Scalar conditional_accuracy(const Network& generator, const Network& golden, const PriorSpec& priors,
                            Index num_samples, std::uint64_t seed);

Scalar semi_sup_error(const Network& classifier, const Matrix& test_x, const std::vector<int>& test_y);

/// exp(mean_i KL(p(y | x_i) || mean_j p(y | x_j))) from rows of class probabilities.
Scalar golden_score_from_probabilities(const Matrix& probabilities);

Scalar golden_score(const Network& generator, const Network& golden, const PriorSpec& priors, Index num_samples,
                    std::uint64_t seed);

/// One output row per target class: G(y_target, I(x_source)). x_source is a single row.
Matrix style_transfer(const Network& generator, const Network& inference, const Matrix& x_source,
                      const std::vector<int>& target_classes);

/// G(y, z_t) with z_t = z_start + t/(steps-1) (z_end - z_start), t = 0..steps-1.
/// Throws std::invalid_argument when steps < 2.
Matrix interpolate(const Network& generator, int y, const RowVector& z_start, const RowVector& z_end, int steps);

struct EvalOptions {
  Index num_samples = 1000;
  std::uint64_t seed = 0;
  ProbeOptions probe;
};

/// All four scalar metrics for one snapshot; loss fields are left to the caller.
MetricsRecord evaluate(const SganNetworks& nets, const Network& golden, const DatasetSplit& data,
                       const PriorSpec& priors, const EvalOptions& options);

}  // namespace sgan
