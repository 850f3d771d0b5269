#include "sgan/eval.hpp"

#include "sgan/adam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sgan {

Scalar accuracy(const Network& classifier, const Matrix& x, const std::vector<int>& y) {
  if (x.rows() == 0) return 0.0;
  const Network c = classifier.frozen();
  const std::vector<int> predicted = argmax_rows(c.logits(Tensor(x)).value());
  Index correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == y.at(i) ? 1 : 0;
  return static_cast<Scalar>(correct) / static_cast<Scalar>(x.rows());
}

GoldenClassifier train_golden_classifier(const LabeledSet& train, const Matrix& test_x,
                                         const std::vector<int>& test_y, Index classes, std::uint64_t seed,
                                         const GoldenTrainOptions& options) {
  LatentDims dims;
  dims.x_dim = train.x.cols();
  dims.y_dim = classes;
  Network net = build_network(default_spec(Role::kClassifier, dims, options.hidden), seed);
  AdamOptions opts;
  opts.learning_rate = options.learning_rate;
  opts.beta1 = 0.9;
  Adam adam(net.params().list(), opts);

  const Matrix targets = one_hot(train.y, classes);
  std::vector<Index> order(static_cast<std::size_t>(train.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const Index batch = std::max<Index>(1, std::min(options.batch_size, train.size()));
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Index start = 0; start + batch <= train.size(); start += batch) {
      Matrix xb(batch, train.x.cols()), yb(batch, classes);
      for (Index i = 0; i < batch; ++i) {
        xb.row(i) = train.x.row(order[static_cast<std::size_t>(start + i)]);
        yb.row(i) = targets.row(order[static_cast<std::size_t>(start + i)]);
      }
      adam.zero_grad();
      backward(cross_entropy_with_logits(net.logits(Tensor(std::move(xb))), Tensor(std::move(yb))));
      adam.step();
    }
  }
  return {net, accuracy(net, test_x, test_y)};
}

Scalar linear_probe_accuracy(const Matrix& features, const std::vector<int>& labels, Index classes,
                             const ProbeOptions& options) {
  const Index n = features.rows();
  if (n == 0) return 0.0;
  Matrix standardized = features.rowwise() - features.colwise().mean();
  for (Index j = 0; j < standardized.cols(); ++j) {
    const Scalar sd = std::sqrt(standardized.col(j).squaredNorm() / static_cast<Scalar>(n));
    if (sd > 1e-12) standardized.col(j) /= sd;
  }
  const Tensor x(std::move(standardized));
  const Tensor target(one_hot(labels, classes));
  Tensor w = Tensor::zeros(features.cols(), classes, true);
  Tensor b = Tensor::zeros(1, classes, true);
  AdamOptions opts;
  opts.learning_rate = options.learning_rate;
  opts.beta1 = 0.9;
  Adam adam({w, b}, opts);
  for (int it = 0; it < options.iterations; ++it) {
    adam.zero_grad();
    backward(cross_entropy_with_logits(add(matmul(x, w), b), target));
    adam.step();
  }
  const std::vector<int> predicted = argmax_rows(add(matmul(x, detach(w)), detach(b)).value());
  Index correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<Scalar>(correct) / static_cast<Scalar>(n);
}

Scalar mp_measure(const Network& inference, const Matrix& x, const std::vector<int>& y, Index classes,
                  const ProbeOptions& options) {
  const Matrix z = inference.frozen().forward(Tensor(x)).value();
  return linear_probe_accuracy(z, y, classes, options);
}

namespace {

struct GeneratedSamples {
  Matrix x;
  std::vector<int> y;
};

GeneratedSamples generate(const Network& generator, const PriorSpec& priors, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GeneratedSamples out;
  out.y = sample_classes(priors, n, rng);
  const Matrix z = sample_z(priors, n, rng);
  out.x = generator_forward(generator.frozen(), Tensor(one_hot(out.y, priors.classes)), Tensor(z)).value();
  return out;
}

}  // namespace

Scalar conditional_accuracy(const Network& generator, const Network& golden, const PriorSpec& priors,
                            Index num_samples, std::uint64_t seed) {
  if (num_samples <= 0) return 0.0;
  const GeneratedSamples samples = generate(generator, priors, num_samples, seed);
  return accuracy(golden, samples.x, samples.y);
}

Scalar semi_sup_error(const Network& classifier, const Matrix& test_x, const std::vector<int>& test_y) {
  return 1.0 - accuracy(classifier, test_x, test_y);
}

Scalar golden_score_from_probabilities(const Matrix& probabilities) {
  const Index n = probabilities.rows();
  if (n == 0) return 1.0;
  const RowVector marginal = probabilities.colwise().mean();
  Scalar total_kl = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < probabilities.cols(); ++k) {
      const Scalar p = probabilities(i, k);
      if (p > 0) total_kl += p * (std::log(p) - std::log(marginal(k)));
    }
  }
  // Rounding can push a zero KL marginally negative.
  return std::exp(std::max(0.0, total_kl / static_cast<Scalar>(n)));
}

Scalar golden_score(const Network& generator, const Network& golden, const PriorSpec& priors, Index num_samples,
                    std::uint64_t seed) {
  const GeneratedSamples samples = generate(generator, priors, num_samples, seed);
  return golden_score_from_probabilities(golden.frozen().forward(Tensor(samples.x)).value());
}

Matrix style_transfer(const Network& generator, const Network& inference, const Matrix& x_source,
                      const std::vector<int>& target_classes) {
  if (x_source.rows() != 1) throw ShapeError("style_transfer: expected a single source row");
  const Matrix z = inference.frozen().forward(Tensor(x_source)).value();
  const Index n = static_cast<Index>(target_classes.size());
  if (n == 0) return Matrix(0, generator.spec().dims.x_dim);
  const Matrix zs = z.replicate(n, 1);
  return generator_forward(generator.frozen(), Tensor(one_hot(target_classes, generator.spec().dims.y_dim)),
                           Tensor(zs))
      .value();
}

Matrix interpolate(const Network& generator, int y, const RowVector& z_start, const RowVector& z_end, int steps) {
  if (steps < 2) throw std::invalid_argument("interpolate: steps must be >= 2, got " + std::to_string(steps));
  if (z_start.size() != z_end.size()) throw ShapeError("interpolate: endpoint dimensions differ");
  Matrix z(steps, z_start.size());
  for (int t = 0; t < steps; ++t) {
    const Scalar frac = static_cast<Scalar>(t) / static_cast<Scalar>(steps - 1);
    z.row(t) = z_start + frac * (z_end - z_start);
  }
  const std::vector<int> ys(static_cast<std::size_t>(steps), y);
  return generator_forward(generator.frozen(), Tensor(one_hot(ys, generator.spec().dims.y_dim)), Tensor(z)).value();
}

MetricsRecord evaluate(const SganNetworks& nets, const Network& golden, const DatasetSplit& data,
                       const PriorSpec& priors, const EvalOptions& options) {
  MetricsRecord record;
  record.test_error = semi_sup_error(nets.classifier, data.test_x, data.test_y);
  record.mp = mp_measure(nets.inference, data.test_x, data.test_y, data.classes, options.probe);
  record.conditional_accuracy =
      conditional_accuracy(nets.generator, golden, priors, options.num_samples, options.seed);
  record.golden_score = golden_score(nets.generator, golden, priors, options.num_samples, options.seed + 1);
  return record;
}

}  // namespace sgan
