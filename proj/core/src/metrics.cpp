#include "user/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "user/rng.hpp"

namespace user {

using nd::Tensor;

namespace {

/// Contingency counts; labels may be any non-negative ids.
std::vector<std::vector<long>> contingency(const std::vector<int>& a,
                                           const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("contingency: label vectors must have equal positive length");
  int ca = 0, cb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || b[i] < 0) throw std::invalid_argument("contingency: negative label");
    ca = std::max(ca, a[i] + 1);
    cb = std::max(cb, b[i] + 1);
  }
  std::vector<std::vector<long>> table(static_cast<std::size_t>(ca),
                                       std::vector<long>(static_cast<std::size_t>(cb), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    ++table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
  return table;
}

double entropy_of_marginal(const std::vector<long>& counts, long n) {
  double h = 0.0;
  for (long c : counts)
    if (c > 0) {
      const double p = static_cast<double>(c) / static_cast<double>(n);
      h -= p * std::log(p);
    }
  return h;
}

/// Min-cost assignment over a square cost matrix (shortest augmenting paths
/// with potentials). Returns column -> row.
std::vector<int> hungarian(const std::vector<std::vector<long>>& cost) {
  const int n = static_cast<int>(cost.size());
  const long inf = std::numeric_limits<long>::max() / 4;
  std::vector<long> u(static_cast<std::size_t>(n) + 1, 0), v(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      long delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const long cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                         u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col_to_row(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j)
    col_to_row[static_cast<std::size_t>(j - 1)] = p[static_cast<std::size_t>(j)] - 1;
  return col_to_row;
}

}  // namespace

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const auto table = contingency(pred, truth);
  const long n = static_cast<long>(pred.size());

  std::vector<long> row_sum(table.size(), 0);
  std::vector<long> col_sum(table.front().size(), 0);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
    }

  const double hp = entropy_of_marginal(row_sum, n);
  const double ht = entropy_of_marginal(col_sum, n);
  if (hp == 0.0 && ht == 0.0) return 1.0;  // both single-cluster: identical partitions
  if (hp == 0.0 || ht == 0.0) return 0.0;

  double mi = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      const long c = table[i][j];
      if (c == 0) continue;
      const double pij = static_cast<double>(c) / static_cast<double>(n);
      const double pi = static_cast<double>(row_sum[i]) / static_cast<double>(n);
      const double qj = static_cast<double>(col_sum[j]) / static_cast<double>(n);
      mi += pij * std::log(pij / (pi * qj));
    }
  return mi / std::sqrt(hp * ht);
}

double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  const auto table = contingency(pred, truth);
  const int k = static_cast<int>(std::max(table.size(), table.front().size()));

  long max_count = 0;
  for (const auto& row : table)
    for (long c : row) max_count = std::max(max_count, c);

  // Pad square; cost = max_count - matches so min cost = max matches.
  std::vector<std::vector<long>> cost(static_cast<std::size_t>(k),
                                      std::vector<long>(static_cast<std::size_t>(k), max_count));
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) cost[i][j] = max_count - table[i][j];

  const std::vector<int> col_to_row = hungarian(cost);
  long matched = 0;
  for (int j = 0; j < k; ++j) {
    const int i = col_to_row[static_cast<std::size_t>(j)];
    if (i < static_cast<int>(table.size()) && j < static_cast<int>(table.front().size()))
      matched += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return static_cast<double>(matched) / static_cast<double>(pred.size());
}

std::vector<int> kmeans(const Tensor& points, int k, std::uint64_t seed, int restarts,
                        int iters) {
  const int n = points.rows(), d = points.cols();
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: k must lie in [1, n]");
  if (restarts < 1 || iters < 1)
    throw std::invalid_argument("kmeans: restarts and iters must be >= 1");

  Rng rng(seed);

  auto dist_sq = [&](int i, const Tensor& centers, int c) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = points(i, j) - centers(c, j);
      s += diff * diff;
    }
    return s;
  };

  std::vector<int> best_labels(static_cast<std::size_t>(n), 0);
  double best_inertia = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < restarts; ++restart) {
    // k-means++ seeding
    Tensor centers(k, d);
    std::vector<double> min_d(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
    {
      const int first = rng.uniform_int(n);
      for (int j = 0; j < d; ++j) centers(0, j) = points(first, j);
      for (int i = 0; i < n; ++i) min_d[static_cast<std::size_t>(i)] = dist_sq(i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double total = std::accumulate(min_d.begin(), min_d.end(), 0.0);
        int pick;
        if (total <= 0.0) {
          pick = rng.uniform_int(n);
        } else {
          double target = rng.uniform() * total;
          pick = n - 1;
          for (int i = 0; i < n; ++i) {
            target -= min_d[static_cast<std::size_t>(i)];
            if (target <= 0.0) {
              pick = i;
              break;
            }
          }
        }
        for (int j = 0; j < d; ++j) centers(c, j) = points(pick, j);
        for (int i = 0; i < n; ++i)
          min_d[static_cast<std::size_t>(i)] =
              std::min(min_d[static_cast<std::size_t>(i)], dist_sq(i, centers, c));
      }
    }

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (int it = 0; it < iters; ++it) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int best = 0;
        double bd = dist_sq(i, centers, 0);
        for (int c = 1; c < k; ++c) {
          const double dd = dist_sq(i, centers, c);
          if (dd < bd) {
            bd = dd;
            best = c;
          }
        }
        if (labels[static_cast<std::size_t>(i)] != best) {
          labels[static_cast<std::size_t>(i)] = best;
          changed = true;
        }
      }

      Tensor sums(k, d);
      std::vector<long> counts(static_cast<std::size_t>(k), 0);
      for (int i = 0; i < n; ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        ++counts[static_cast<std::size_t>(c)];
        for (int j = 0; j < d; ++j) sums(c, j) += points(i, j);
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
          // Re-seed an empty cluster from the globally farthest point.
          int far = 0;
          double far_d = -1.0;
          for (int i = 0; i < n; ++i) {
            const double dd = dist_sq(i, centers, labels[static_cast<std::size_t>(i)]);
            if (dd > far_d) {
              far_d = dd;
              far = i;
            }
          }
          for (int j = 0; j < d; ++j) centers(c, j) = points(far, j);
          labels[static_cast<std::size_t>(far)] = c;
          changed = true;
        } else {
          for (int j = 0; j < d; ++j)
            centers(c, j) = sums(c, j) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
      }
      if (!changed) break;
    }

    double inertia = 0.0;
    for (int i = 0; i < n; ++i) inertia += dist_sq(i, centers, labels[static_cast<std::size_t>(i)]);
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  return best_labels;
}

LinkSplit link_split(const Graph& g, double val_frac, double test_frac, std::uint64_t seed) {
  if (val_frac < 0.0 || test_frac < 0.0 || val_frac + test_frac > 1.0)
    throw std::invalid_argument("link_split: fractions must be >= 0 and sum to <= 1");

  std::vector<std::pair<int, int>> edges = g.edges();
  const long long e = static_cast<long long>(edges.size());
  const long long n_val = std::llround(val_frac * static_cast<double>(e));
  const long long n_test = std::llround(test_frac * static_cast<double>(e));
  if (n_val + n_test >= e && n_val + n_test > 0)
    throw std::invalid_argument("link_split: split would leave no training edges");

  const int n = g.node_count();
  const long long non_edges = static_cast<long long>(n) * (n - 1) / 2 - e;
  if (n_val + n_test > non_edges)
    throw std::invalid_argument("link_split: not enough non-edges for negative sampling");

  Rng rng(seed);
  // Fisher-Yates, then the prefix holds the hidden positives.
  for (long long i = e - 1; i > 0; --i) {
    const int j = rng.uniform_int(static_cast<int>(i + 1));
    std::swap(edges[static_cast<std::size_t>(i)], edges[static_cast<std::size_t>(j)]);
  }

  LinkSplit split{Graph::empty_graph(0), {}, {}, {}, {}};
  split.test_pos.assign(edges.begin(), edges.begin() + n_test);
  split.val_pos.assign(edges.begin() + n_test, edges.begin() + n_test + n_val);

  Tensor a = g.adjacency();
  for (long long i = 0; i < n_test + n_val; ++i) {
    const auto [u, v] = edges[static_cast<std::size_t>(i)];
    a(u, v) = 0.0;
    a(v, u) = 0.0;
  }
  split.train_graph = Graph(std::move(a));

  // Negatives: uniform non-edges of the ORIGINAL graph, disjoint across splits.
  std::unordered_set<long long> taken;
  auto draw_negatives = [&](long long count, std::vector<std::pair<int, int>>& out) {
    while (static_cast<long long>(out.size()) < count) {
      int i = rng.uniform_int(n);
      int j = rng.uniform_int(n);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      if (g.has_edge(i, j)) continue;
      const long long key = static_cast<long long>(i) * n + j;
      if (!taken.insert(key).second) continue;
      out.emplace_back(i, j);
    }
  };
  draw_negatives(n_test, split.test_neg);
  draw_negatives(n_val, split.val_neg);
  return split;
}

std::vector<double> score_links(const Tensor& h, std::span<const std::pair<int, int>> pairs) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= h.rows() || j >= h.rows())
      throw std::out_of_range("score_links: node index out of range");
    double dot = 0.0;
    for (int k = 0; k < h.cols(); ++k) dot += h(i, k) * h(j, k);
    scores.push_back(1.0 / (1.0 + std::exp(-dot)));
  }
  return scores;
}

namespace {

void check_binary_labels(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("metric: scores/labels must have equal positive length");
  bool has_pos = false, has_neg = false;
  for (int l : labels) {
    if (l == 1)
      has_pos = true;
    else if (l == 0)
      has_neg = true;
    else
      throw std::invalid_argument("metric: labels must be 0 or 1");
  }
  if (!has_pos || !has_neg)
    throw std::invalid_argument("metric: both classes must be present");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels01) {
  check_binary_labels(scores, labels01);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over tie groups.
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }

  double pos_rank_sum = 0.0;
  long pos = 0, neg = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (labels01[t] == 1) {
      ++pos;
      pos_rank_sum += rank[t];
    } else {
      ++neg;
    }
  }
  return (pos_rank_sum - static_cast<double>(pos) * (static_cast<double>(pos) + 1.0) / 2.0) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

double average_precision(std::span<const double> scores, std::span<const int> labels01) {
  check_binary_labels(scores, labels01);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  long total_pos = 0;
  for (int l : labels01) total_pos += l;

  double ap = 0.0;
  double prev_recall = 0.0;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) {
      if (labels01[order[t]] == 1)
        ++tp;
      else
        ++fp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j + 1;
  }
  return ap;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  auto put = [&j](const char* key, const auto& opt) {
    if (opt)
      j[key] = *opt;
    else
      j[key] = nullptr;
  };
  put("nmi_argmaxY", nmi_argmax_y);
  put("nmi_kmeans", nmi_kmeans);
  put("acc_argmaxY", acc_argmax_y);
  put("acc_kmeans", acc_kmeans);
  put("auc", auc);
  put("ap", ap);
  put("rank_Aprime", rank_a_prime);
  put("loss_final", loss_final);
  return j.dump(2) + "\n";
}

}  // namespace user
