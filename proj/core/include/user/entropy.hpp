#pragma once

#include <vector>

#include "user/graph.hpp"
#include "user/tape.hpp"

namespace user {

/// Disjoint cover of the node set by `groups` non-empty classes.
struct HardPartition {
  std::vector<int> assignment;  // class ids in [0, groups)
  int groups = 0;
};

/// Throws unless every class in [0, groups) is non-empty and ids are in range.
void validate_partition(const HardPartition& p);

/// One-hot indicator matrix of a hard partition (n x groups).
nd::Tensor indicator_matrix(const HardPartition& p);

/// Recovers a hard partition from a row-stochastic indicator via row argmax.
std::vector<int> argmax_rows(const nd::Tensor& y);

/// Throws unless y is row-stochastic: rows sum to 1 (+-1e-9), entries in [0,1].
void validate_soft_indicator(const nd::Tensor& y);

enum class NpsiConvention {
  /// Both factors divided by sum(A); node and matrix forms coincide on hard
  /// partitions.
  kReconciled,
  /// Both factors divided by 2*sum(A); kept for comparison only, no
  /// equivalence with the node form is claimed.
  kLiteralDoubleSum,
};

/// Partition structural entropy in node form:
///   sum_k ((vol_k - g_k) / 2|E|) * log2(vol_k / 2|E|)
/// with vol_k the degree sum of class k and g_k its cut size. Always <= 0;
/// zero-coefficient terms contribute 0.
double npsi_node(const Graph& g, const HardPartition& p);

/// Differentiable matrix form of the same quantity:
///   sum_k [(Yt A Y)_kk / sum(A)] * log2((1 A Y)_kk / sum(A))
/// Log arguments are clamped at 1e-12. a_prime must be non-negative with a
/// positive total; y must be row-stochastic.
nd::Var npsi_matrix(nd::Tape& tape, nd::Var a_prime, nd::Var y,
                    NpsiConvention convention = NpsiConvention::kReconciled);

/// Davies-Bouldin index of features x under a hard partition (verbatim form:
/// within-cluster scatter over centroid distance, worst neighbour, averaged).
/// Centroid distances are clamped at 1e-12; requires >= 2 groups.
double dbi_hard(const nd::Tensor& x, const HardPartition& p);

/// Soft-mass DBI over a row-stochastic indicator, on tape. Cluster masses are
/// clamped at 1e-6; the max over rival clusters is a hard max whose gradient
/// follows the argmax branch.
nd::Var dbi_soft(nd::Tape& tape, nd::Var y, const nd::Tensor& x);

struct LnParts {
  nd::Var npsi;
  nd::Var dbi;
};

/// Combined innocuous-graph loss: npsi_matrix(a_prime, y) + beta * dbi_soft.
/// `parts` (optional) receives the two addends for logging.
nd::Var loss_ln(nd::Tape& tape, nd::Var a_prime, nd::Var y, const nd::Tensor& x,
                double beta, NpsiConvention convention = NpsiConvention::kReconciled,
                LnParts* parts = nullptr);

}  // namespace user
