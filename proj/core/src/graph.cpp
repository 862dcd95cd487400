#include "user/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "user/rng.hpp"

namespace user {

using nd::Tensor;

Graph::Graph(Tensor adjacency) : adj_(std::move(adjacency)) {
  const int n = adj_.rows();
  if (adj_.cols() != n) throw std::invalid_argument("Graph: adjacency must be square");
  for (int i = 0; i < n; ++i) {
    if (adj_(i, i) != 0.0) throw std::invalid_argument("Graph: nonzero diagonal");
    for (int j = i + 1; j < n; ++j) {
      const double v = adj_(i, j);
      if (v != adj_(j, i)) throw std::invalid_argument("Graph: adjacency not symmetric");
      if (v != 0.0 && v != 1.0) throw std::invalid_argument("Graph: entries must be 0 or 1");
      if (v == 1.0) ++edge_count_;
    }
  }
}

Graph Graph::empty_graph(int n) { return Graph(Tensor(n, n)); }

Graph Graph::from_edge_list(int n, const std::vector<std::pair<int, int>>& edges) {
  Tensor a(n, n);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::out_of_range("Graph::from_edge_list: node index out of range");
    if (u == v) continue;
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return Graph(std::move(a));
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(edge_count_));
  const int n = node_count();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (adj_(i, j) != 0.0) out.emplace_back(i, j);
  return out;
}

std::vector<int> Graph::degrees() const {
  const int n = node_count();
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (adj_(i, j) != 0.0) ++deg[static_cast<std::size_t>(i)];
  return deg;
}

int Dataset::num_classes() const { return labels ? num_label_classes(*labels) : 0; }

int num_label_classes(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("labels: empty");
  int c = 0;
  for (int v : labels) {
    if (v < 0) throw std::invalid_argument("labels: negative class id");
    c = std::max(c, v + 1);
  }
  std::vector<char> seen(static_cast<std::size_t>(c), 0);
  for (int v : labels) seen[static_cast<std::size_t>(v)] = 1;
  for (int k = 0; k < c; ++k)
    if (!seen[static_cast<std::size_t>(k)])
      throw std::invalid_argument("labels: class " + std::to_string(k) + " is empty");
  return c;
}

void validate_dataset(const Dataset& ds) {
  if (ds.features.rows() != ds.graph.node_count())
    throw std::invalid_argument("Dataset: feature rows != node count");
  if (ds.labels) {
    if (static_cast<int>(ds.labels->size()) != ds.graph.node_count())
      throw std::invalid_argument("Dataset: label count != node count");
    num_label_classes(*ds.labels);
  }
}

Tensor intrinsic_graph(const std::vector<int>& labels) {
  num_label_classes(labels);
  const int n = static_cast<int>(labels.size());
  Tensor a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a(i, j) = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]
                    ? 1.0
                    : 0.0;
  return a;
}

Graph flip_noise(const Graph& g, double ratio, std::uint64_t seed) {
  if (ratio < 0.0) throw std::invalid_argument("flip_noise: ratio must be >= 0");
  const long long flips = std::llround(ratio * static_cast<double>(g.edge_count()));
  return flip_noise_count(g, flips, seed);
}

Graph flip_noise_count(const Graph& g, long long flips, std::uint64_t seed) {
  const int n = g.node_count();
  const long long total_pairs = static_cast<long long>(n) * (n - 1) / 2;
  if (flips < 0 || flips > total_pairs)
    throw std::invalid_argument("flip_noise: flip count exceeds node-pair count");

  Rng rng(seed);
  std::unordered_set<long long> chosen;
  chosen.reserve(static_cast<std::size_t>(flips) * 2);
  while (static_cast<long long>(chosen.size()) < flips) {
    int i = rng.uniform_int(n);
    int j = rng.uniform_int(n);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    chosen.insert(static_cast<long long>(i) * n + j);
  }

  Tensor a = g.adjacency();
  for (long long key : chosen) {
    const int i = static_cast<int>(key / n);
    const int j = static_cast<int>(key % n);
    const double v = a(i, j) == 0.0 ? 1.0 : 0.0;
    a(i, j) = v;
    a(j, i) = v;
  }
  return Graph(std::move(a));
}

RemoveIsolatedResult remove_isolated(const Dataset& ds) {
  validate_dataset(ds);
  const int n = ds.graph.node_count();
  const std::vector<int> deg = ds.graph.degrees();

  std::vector<int> old_to_new(static_cast<std::size_t>(n), -1);
  std::vector<int> kept;
  for (int i = 0; i < n; ++i)
    if (deg[static_cast<std::size_t>(i)] > 0) {
      old_to_new[static_cast<std::size_t>(i)] = static_cast<int>(kept.size());
      kept.push_back(i);
    }
  if (kept.empty()) throw std::domain_error("remove_isolated: all nodes are isolated");

  const int m = static_cast<int>(kept.size());
  Tensor a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      a(i, j) = ds.graph.adjacency()(kept[static_cast<std::size_t>(i)],
                                     kept[static_cast<std::size_t>(j)]);

  Tensor x(m, ds.features.cols());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < ds.features.cols(); ++j)
      x(i, j) = ds.features(kept[static_cast<std::size_t>(i)], j);

  std::optional<std::vector<int>> labels;
  if (ds.labels) {
    std::vector<int> l(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      l[static_cast<std::size_t>(i)] =
          (*ds.labels)[static_cast<std::size_t>(kept[static_cast<std::size_t>(i)])];
    labels = std::move(l);
  }

  return RemoveIsolatedResult{Dataset{Graph(std::move(a)), std::move(x), std::move(labels)},
                              std::move(old_to_new)};
}

Tensor degree_normalize(const Tensor& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("degree_normalize: matrix not square");
  const int n = a.rows();
  Tensor out(n, n);
  std::vector<double> dinv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = 1.0;  // self loop
    for (int j = 0; j < n; ++j) s += a(i, j);
    dinv[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(std::max(s, nd::Tape::kEps));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = a(i, j) + (i == j ? 1.0 : 0.0);
      out(i, j) = dinv[static_cast<std::size_t>(i)] * v * dinv[static_cast<std::size_t>(j)];
    }
  return out;
}

nd::Var degree_normalize(nd::Tape& tape, nd::Var a) {
  const Tensor& av = tape.value(a);
  if (av.rows() != av.cols()) throw std::invalid_argument("degree_normalize: matrix not square");
  const nd::Var with_loops = tape.add(a, tape.constant(Tensor::identity(av.rows())));
  const nd::Var dinv = tape.reciprocal_eps(tape.sqrt(tape.row_sum(with_loops)));  // n x 1
  const nd::Var rows_scaled = tape.mul(with_loops, dinv);
  return tape.mul(rows_scaled, tape.transpose(dinv));
}

std::vector<double> singular_values(const Tensor& a) {
  // One-sided Jacobi on columns: rotate column pairs until all are pairwise
  // orthogonal; the singular values are the resulting column norms.
  Tensor w = a.rows() >= a.cols() ? a : nd::transpose(a);
  const int m = w.rows(), n = w.cols();

  auto col_dot = [&](int p, int q) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += w(i, p) * w(i, q);
    return s;
  };

  const int max_sweeps = 60;
  const double tol = 1e-14;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double app = col_dot(p, p);
        const double aqq = col_dot(q, q);
        const double apq = col_dot(p, q);
        if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) sigma[static_cast<std::size_t>(j)] = std::sqrt(col_dot(j, j));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

int numerical_rank(const Tensor& a, double rel_tol) {
  const std::vector<double> sigma = singular_values(a);
  if (sigma.empty()) return 0;
  const double cutoff = rel_tol * sigma.front();
  int rank = 0;
  for (double s : sigma)
    if (s > cutoff && s > 0.0) ++rank;
  return rank;
}

}  // namespace user
