#include "sgan/priors.hpp"

#include <stdexcept>
#include <string>

namespace sgan {

std::string_view z_prior_name(ZPrior p) { return p == ZPrior::kGaussian ? "gaussian" : "uniform"; }

ZPrior parse_z_prior(std::string_view name) {
  if (name == "gaussian") return ZPrior::kGaussian;
  if (name == "uniform") return ZPrior::kUniform;
  throw std::invalid_argument("unknown z prior '" + std::string(name) + "' (expected gaussian or uniform)");
}

void PriorSpec::validate() const {
  if (classes < 1) throw std::invalid_argument("prior: classes must be >= 1");
  if (z_dim < 1) throw std::invalid_argument("prior: z_dim must be >= 1");
}

std::vector<int> sample_classes(const PriorSpec& priors, Index n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(priors.classes) - 1);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (auto& k : out) k = pick(rng);
  return out;
}

Matrix sample_z(const PriorSpec& priors, Index n, std::mt19937_64& rng) {
  Matrix z(n, priors.z_dim);
  if (priors.z_prior == ZPrior::kGaussian) {
    std::normal_distribution<Scalar> dist(0.0, 1.0);
    for (Index i = 0; i < z.size(); ++i) z.data()[i] = dist(rng);
  } else {
    std::uniform_real_distribution<Scalar> dist(-1.0, 1.0);
    for (Index i = 0; i < z.size(); ++i) z.data()[i] = dist(rng);
  }
  return z;
}

}  // namespace sgan
