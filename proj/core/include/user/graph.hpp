#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "user/tape.hpp"
#include "user/tensor.hpp"

namespace user {

/// Undirected, unweighted graph stored as a dense symmetric 0/1 adjacency
/// with zero diagonal. The invariants are checked on construction.
class Graph {
 public:
  explicit Graph(nd::Tensor adjacency);

  static Graph empty_graph(int n);
  /// Builds from (u, v) pairs; duplicates and self loops are ignored.
  static Graph from_edge_list(int n, const std::vector<std::pair<int, int>>& edges);

  int node_count() const { return adj_.rows(); }
  long long edge_count() const { return edge_count_; }
  bool has_edge(int i, int j) const { return adj_(i, j) != 0.0; }
  const nd::Tensor& adjacency() const { return adj_; }

  /// Edges as (i, j) with i < j in lexicographic order.
  std::vector<std::pair<int, int>> edges() const;
  std::vector<int> degrees() const;

 private:
  nd::Tensor adj_;
  long long edge_count_ = 0;
};

struct Dataset {
  Graph graph;
  nd::Tensor features;               // n x d
  std::optional<std::vector<int>> labels;  // class ids in [0, c)

  int num_classes() const;  // 0 when labels are absent
};

/// Throws if feature rows do not match the node count or if labels are
/// present with an empty class.
void validate_dataset(const Dataset& ds);

/// Number of distinct classes; throws if any id in [0, max] is missing or
/// negative.
int num_label_classes(const std::vector<int>& labels);

/// Same-class indicator matrix, diagonal included; a rank-c block-of-ones
/// matrix for c classes.
nd::Tensor intrinsic_graph(const std::vector<int>& labels);

/// Toggles round(ratio * |E|) distinct node pairs chosen uniformly (seeded);
/// self loops are never selected.
Graph flip_noise(const Graph& g, double ratio, std::uint64_t seed);

/// Same toggle with an explicit pair count. Applying twice with equal
/// (flips, seed) restores the input.
Graph flip_noise_count(const Graph& g, long long flips, std::uint64_t seed);

struct RemoveIsolatedResult {
  Dataset dataset;
  std::vector<int> old_to_new;  // -1 for dropped nodes
};

/// Drops degree-zero nodes and reindexes features/labels/adjacency.
RemoveIsolatedResult remove_isolated(const Dataset& ds);

/// Dt^{-1/2} (A + I) Dt^{-1/2} with Dt = diag(row sums of A + I).
nd::Tensor degree_normalize(const nd::Tensor& a);
/// Differentiable version of the same composition.
nd::Var degree_normalize(nd::Tape& tape, nd::Var a);

/// Singular values in descending order (one-sided Jacobi).
std::vector<double> singular_values(const nd::Tensor& a);

/// Count of singular values strictly above rel_tol * sigma_max.
int numerical_rank(const nd::Tensor& a, double rel_tol = 1e-6);

}  // namespace user
