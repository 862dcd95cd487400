#include "user/sbm.hpp"

#include <numeric>
#include <stdexcept>

#include "user/rng.hpp"

namespace user {

using nd::Tensor;

Dataset sbm_generate(const SbmConfig& cfg) {
  const int c = static_cast<int>(cfg.block_sizes.size());
  if (c < 1) throw std::invalid_argument("sbm_generate: need at least one block");
  for (int s : cfg.block_sizes)
    if (s < 1) throw std::invalid_argument("sbm_generate: block sizes must be >= 1");
  if (cfg.p_in < 0.0 || cfg.p_in > 1.0 || cfg.p_out < 0.0 || cfg.p_out > 1.0)
    throw std::invalid_argument("sbm_generate: probabilities must lie in [0,1]");
  if (cfg.p_in < cfg.p_out)
    throw std::invalid_argument("sbm_generate: p_in must be >= p_out");
  if (cfg.feature_dim < c)
    throw std::invalid_argument("sbm_generate: feature_dim must be >= block count");
  if (cfg.noise_scale < 0.0)
    throw std::invalid_argument("sbm_generate: noise scale must be >= 0");

  const int n = std::accumulate(cfg.block_sizes.begin(), cfg.block_sizes.end(), 0);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (int b = 0; b < c; ++b)
    labels.insert(labels.end(), static_cast<std::size_t>(cfg.block_sizes[static_cast<std::size_t>(b)]), b);

  // Fixed draw order: all pairs (i<j), then features row-major.
  Rng rng(cfg.seed);
  Tensor a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double p = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]
                           ? cfg.p_in
                           : cfg.p_out;
      if (rng.uniform() < p) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }

  Tensor x(n, cfg.feature_dim);
  for (int i = 0; i < n; ++i) {
    x(i, labels[static_cast<std::size_t>(i)]) = 1.0;
    for (int j = 0; j < cfg.feature_dim; ++j) x(i, j) += cfg.noise_scale * rng.normal();
  }

  return Dataset{Graph(std::move(a)), std::move(x), std::move(labels)};
}

}  // namespace user
