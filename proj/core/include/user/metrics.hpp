#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "user/graph.hpp"

namespace user {

/// Normalized mutual information with sqrt-of-entropies normalization.
/// Both sides single-cluster yields 1; one degenerate side yields 0.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

/// Fraction of points matched under the best label bijection (optimal
/// assignment on the contingency table).
double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// k-means++ seeding, Lloyd iterations, best inertia over restarts. Empty
/// clusters are re-seeded from the farthest point. Deterministic per seed.
std::vector<int> kmeans(const nd::Tensor& points, int k, std::uint64_t seed,
                        int restarts = 10, int iters = 300);

struct LinkSplit {
  Graph train_graph;
  std::vector<std::pair<int, int>> val_pos, val_neg;
  std::vector<std::pair<int, int>> test_pos, test_neg;
};

/// Hides round(val*|E|) + round(test*|E|) edges from the graph and samples
/// count-matched negatives from its non-edges (all splits disjoint, seeded).
LinkSplit link_split(const Graph& g, double val_frac, double test_frac, std::uint64_t seed);

/// sigmoid(h_i . h_j) per query pair.
std::vector<double> score_links(const nd::Tensor& h,
                                std::span<const std::pair<int, int>> pairs);

/// Rank-statistic AUC with midrank tie handling.
double auc(std::span<const double> scores, std::span<const int> labels01);

/// Average precision over the score-sorted sweep, ties grouped.
double average_precision(std::span<const double> scores, std::span<const int> labels01);

struct MetricsReport {
  std::optional<double> nmi_argmax_y;
  std::optional<double> nmi_kmeans;
  std::optional<double> acc_argmax_y;
  std::optional<double> acc_kmeans;
  std::optional<double> auc;
  std::optional<double> ap;
  std::optional<int> rank_a_prime;
  std::optional<double> loss_final;

  /// Flat JSON object; absent metrics serialize as null.
  std::string to_json() const;
};

}  // namespace user
