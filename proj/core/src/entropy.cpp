#include "user/entropy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace user {

using nd::Tape;
using nd::Tensor;
using nd::Var;

void validate_partition(const HardPartition& p) {
  if (p.groups < 1) throw std::invalid_argument("HardPartition: groups must be >= 1");
  if (p.assignment.empty()) throw std::invalid_argument("HardPartition: empty assignment");
  std::vector<char> seen(static_cast<std::size_t>(p.groups), 0);
  for (int v : p.assignment) {
    if (v < 0 || v >= p.groups)
      throw std::invalid_argument("HardPartition: class id out of range");
    seen[static_cast<std::size_t>(v)] = 1;
  }
  for (int k = 0; k < p.groups; ++k)
    if (!seen[static_cast<std::size_t>(k)])
      throw std::invalid_argument("HardPartition: class " + std::to_string(k) + " is empty");
}

Tensor indicator_matrix(const HardPartition& p) {
  validate_partition(p);
  Tensor y(static_cast<int>(p.assignment.size()), p.groups);
  for (int i = 0; i < y.rows(); ++i) y(i, p.assignment[static_cast<std::size_t>(i)]) = 1.0;
  return y;
}

std::vector<int> argmax_rows(const Tensor& y) {
  std::vector<int> out(static_cast<std::size_t>(y.rows()));
  for (int i = 0; i < y.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < y.cols(); ++j)
      if (y(i, j) > y(i, best)) best = j;
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

void validate_soft_indicator(const Tensor& y) {
  for (int i = 0; i < y.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < y.cols(); ++j) {
      const double v = y(i, j);
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("soft indicator: entry outside [0,1]");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("soft indicator: row " + std::to_string(i) +
                                  " does not sum to 1");
  }
}

double npsi_node(const Graph& g, const HardPartition& p) {
  validate_partition(p);
  if (static_cast<int>(p.assignment.size()) != g.node_count())
    throw std::invalid_argument("npsi_node: partition size != node count");
  if (g.edge_count() == 0) throw std::domain_error("npsi_node: graph has no edges");

  const std::vector<int> deg = g.degrees();
  std::vector<double> vol(static_cast<std::size_t>(p.groups), 0.0);
  std::vector<double> cut(static_cast<std::size_t>(p.groups), 0.0);
  for (int i = 0; i < g.node_count(); ++i)
    vol[static_cast<std::size_t>(p.assignment[static_cast<std::size_t>(i)])] +=
        deg[static_cast<std::size_t>(i)];
  for (auto [u, v] : g.edges()) {
    const int cu = p.assignment[static_cast<std::size_t>(u)];
    const int cv = p.assignment[static_cast<std::size_t>(v)];
    if (cu != cv) {
      cut[static_cast<std::size_t>(cu)] += 1.0;
      cut[static_cast<std::size_t>(cv)] += 1.0;
    }
  }

  const double two_e = 2.0 * static_cast<double>(g.edge_count());
  double total = 0.0;
  for (int k = 0; k < p.groups; ++k) {
    const double coeff = vol[static_cast<std::size_t>(k)] - cut[static_cast<std::size_t>(k)];
    if (coeff == 0.0) continue;  // zero coefficient forces the term to 0
    total += (coeff / two_e) * std::log2(vol[static_cast<std::size_t>(k)] / two_e);
  }
  return total;
}

Var npsi_matrix(Tape& tape, Var a_prime, Var y, NpsiConvention convention) {
  const Tensor& a = tape.value(a_prime);
  const Tensor& yv = tape.value(y);
  if (a.rows() != a.cols()) throw std::invalid_argument("npsi_matrix: a_prime not square");
  if (yv.rows() != a.rows())
    throw std::invalid_argument("npsi_matrix: indicator rows != node count");
  validate_soft_indicator(yv);
  double total = 0.0;
  for (double v : a.data()) {
    if (v < 0.0) throw std::domain_error("npsi_matrix: negative adjacency entry");
    total += v;
  }
  if (total <= 0.0) throw std::domain_error("npsi_matrix: adjacency sums to zero");

  Var denom = tape.sum_all(a_prime);
  if (convention == NpsiConvention::kLiteralDoubleSum)
    denom = tape.mul(denom, tape.constant(Tensor::scalar(2.0)));

  const Var ay = tape.matmul(a_prime, y);                   // n x r
  const Var within = tape.col_sum(tape.mul(y, ay));         // 1 x r, diag(Yt A Y)
  const Var volume = tape.col_sum(ay);                      // 1 x r, diag(1 A Y)
  const Var coeff = tape.div_eps(within, denom);
  const Var log_term = tape.log2_eps(tape.div_eps(volume, denom));
  return tape.sum_all(tape.mul(coeff, log_term));
}

double dbi_hard(const Tensor& x, const HardPartition& p) {
  validate_partition(p);
  if (static_cast<int>(p.assignment.size()) != x.rows())
    throw std::invalid_argument("dbi_hard: partition size != feature rows");
  if (p.groups < 2) throw std::domain_error("dbi_hard: need at least two groups");

  const int r = p.groups, d = x.cols();
  std::vector<double> count(static_cast<std::size_t>(r), 0.0);
  Tensor mean(r, d);
  for (int i = 0; i < x.rows(); ++i) {
    const int k = p.assignment[static_cast<std::size_t>(i)];
    count[static_cast<std::size_t>(k)] += 1.0;
    for (int j = 0; j < d; ++j) mean(k, j) += x(i, j);
  }
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < d; ++j) mean(k, j) /= count[static_cast<std::size_t>(k)];

  std::vector<double> scatter(static_cast<std::size_t>(r), 0.0);
  for (int i = 0; i < x.rows(); ++i) {
    const int k = p.assignment[static_cast<std::size_t>(i)];
    double sq = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = x(i, j) - mean(k, j);
      sq += diff * diff;
    }
    scatter[static_cast<std::size_t>(k)] += sq;
  }
  for (int k = 0; k < r; ++k)
    scatter[static_cast<std::size_t>(k)] =
        std::sqrt(scatter[static_cast<std::size_t>(k)] / count[static_cast<std::size_t>(k)]);

  double dbi = 0.0;
  for (int k = 0; k < r; ++k) {
    double worst = 0.0;
    for (int m = 0; m < r; ++m) {
      if (m == k) continue;
      double dist_sq = 0.0;
      for (int j = 0; j < d; ++j) {
        const double diff = mean(k, j) - mean(m, j);
        dist_sq += diff * diff;
      }
      const double dist = std::sqrt(dist_sq);
      const double ratio = (scatter[static_cast<std::size_t>(k)] +
                            scatter[static_cast<std::size_t>(m)]) /
                           std::max(dist, Tape::kEps);
      worst = std::max(worst, ratio);
    }
    dbi += worst;
  }
  return dbi / static_cast<double>(r);
}

Var dbi_soft(Tape& tape, Var y, const Tensor& x) {
  const Tensor& yv = tape.value(y);
  if (yv.rows() != x.rows())
    throw std::invalid_argument("dbi_soft: indicator rows != feature rows");
  const int r = yv.cols();
  if (r < 2) throw std::domain_error("dbi_soft: need at least two groups");
  validate_soft_indicator(yv);

  const Var xs = tape.constant(x);
  const Var mass_eps = tape.constant(Tensor::scalar(1e-6));

  // mass_k clamped at 1e-6: max(m, eps) = relu(m - eps) + eps
  const Var mass_raw = tape.col_sum(y);  // 1 x r
  const Var mass = tape.add(tape.relu(tape.sub(mass_raw, mass_eps)), mass_eps);

  const Var centroids = tape.div_eps(tape.matmul(tape.transpose(y), xs),
                                     tape.transpose(mass));  // r x d

  std::vector<Var> pick_row(static_cast<std::size_t>(r));  // 1 x r one-hots
  std::vector<Var> pick_col(static_cast<std::size_t>(r));  // r x 1 one-hots
  for (int k = 0; k < r; ++k) {
    Tensor e(1, r);
    e(0, k) = 1.0;
    pick_row[static_cast<std::size_t>(k)] = tape.constant(e);
    pick_col[static_cast<std::size_t>(k)] = tape.constant(nd::transpose(e));
  }

  // S_k = sqrt(sum_i Y_ik |x_i - c_k|^2 / mass_k)
  std::vector<Var> scatter(static_cast<std::size_t>(r));
  std::vector<Var> centroid_rows(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) {
    const Var ck = tape.matmul(pick_row[static_cast<std::size_t>(k)], centroids);  // 1 x d
    centroid_rows[static_cast<std::size_t>(k)] = ck;
    const Var sq_dist = tape.row_sum(tape.square(tape.sub(xs, ck)));               // n x 1
    const Var weights = tape.matmul(y, pick_col[static_cast<std::size_t>(k)]);     // n x 1
    const Var weighted = tape.sum_all(tape.mul(sq_dist, weights));
    const Var mass_k = tape.matmul(mass, pick_col[static_cast<std::size_t>(k)]);   // 1 x 1
    scatter[static_cast<std::size_t>(k)] = tape.sqrt(tape.div_eps(weighted, mass_k));
  }

  // DI_k = max_{m != k} (S_k + S_m) / |c_k - c_m|; selected by value so the
  // gradient follows the argmax branch.
  Var di_total{};
  for (int k = 0; k < r; ++k) {
    Var best{};
    double best_value = 0.0;
    for (int m = 0; m < r; ++m) {
      if (m == k) continue;
      const Var diff = tape.sub(centroid_rows[static_cast<std::size_t>(k)],
                                centroid_rows[static_cast<std::size_t>(m)]);
      const Var dist = tape.sqrt(tape.row_sum(tape.square(diff)));  // 1 x 1
      const Var ratio = tape.div_eps(tape.add(scatter[static_cast<std::size_t>(k)],
                                              scatter[static_cast<std::size_t>(m)]),
                                     dist);
      if (!best.valid() || tape.value(ratio)(0, 0) > best_value) {
        best = ratio;
        best_value = tape.value(ratio)(0, 0);
      }
    }
    di_total = di_total.valid() ? tape.add(di_total, best) : best;
  }
  return tape.mul(di_total, tape.constant(Tensor::scalar(1.0 / static_cast<double>(r))));
}

Var loss_ln(Tape& tape, Var a_prime, Var y, const Tensor& x, double beta,
            NpsiConvention convention, LnParts* parts) {
  if (beta < 0.0) throw std::invalid_argument("loss_ln: beta must be >= 0");
  const Var npsi = npsi_matrix(tape, a_prime, y, convention);
  const Var dbi = dbi_soft(tape, y, x);
  if (parts) *parts = LnParts{npsi, dbi};
  return tape.add(npsi, tape.mul(dbi, tape.constant(Tensor::scalar(beta))));
}

}  // namespace user
