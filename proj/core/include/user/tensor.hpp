#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace user::nd {

/// Dense row-major matrix of doubles. This is the value type carried by every
/// tape node; treat instances handed to a Tape as immutable.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols);  // zero-filled
  Tensor(int rows, int cols, std::vector<double> data);

  static Tensor full(int rows, int cols, double value);
  static Tensor identity(int n);
  static Tensor scalar(double value);  // 1x1
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double operator()(int i, int j) const { return data_[idx(i, j)]; }
  double& operator()(int i, int j) { return data_[idx(i, j)]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool all_finite() const;
  double max_abs() const;

  bool operator==(const Tensor& o) const = default;

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(j);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Shape-checked eager kernels. The tape reuses these for its forward values;
// plain numeric code (metrics, oracles) uses them directly.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);
double sum(const Tensor& x);
Tensor row_sums(const Tensor& x);  // rows x 1
Tensor col_sums(const Tensor& x);  // 1 x cols

/// max_ij |a_ij - b_ij|; shapes must agree.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace user::nd
