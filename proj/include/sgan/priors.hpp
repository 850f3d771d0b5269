#pragma once

#include "sgan/networks.hpp"

#include <random>
#include <string_view>
#include <vector>

namespace sgan {

enum class ZPrior { kGaussian, kUniform };

std::string_view z_prior_name(ZPrior p);
ZPrior parse_z_prior(std::string_view name);

/// y ~ uniform categorical over `classes`; z ~ N(0, I) or U(-1, 1)^z_dim.
struct PriorSpec {
  Index classes = 4;
  Index z_dim = 1;
  ZPrior z_prior = ZPrior::kUniform;

  void validate() const;
};

std::vector<int> sample_classes(const PriorSpec& priors, Index n, std::mt19937_64& rng);
Matrix sample_z(const PriorSpec& priors, Index n, std::mt19937_64& rng);

}  // namespace sgan
