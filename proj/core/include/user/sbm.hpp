#pragma once

#include <cstdint>
#include <vector>

#include "user/graph.hpp"

namespace user {

/// Stochastic block model with one-hot block centroids plus Gaussian feature
/// noise. Within-block pairs connect with p_in, cross-block with p_out.
struct SbmConfig {
  std::vector<int> block_sizes;
  double p_in = 0.3;
  double p_out = 0.02;
  int feature_dim = 16;
  double noise_scale = 0.3;
  std::uint64_t seed = 1;
};

Dataset sbm_generate(const SbmConfig& cfg);

}  // namespace user
