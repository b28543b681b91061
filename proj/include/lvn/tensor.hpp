#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lvn {

/// Dense row-major matrix of doubles. Used for node features, activations,
/// weights and gradients alike.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense kernels. All throw ShapeError on mismatched operands; `what`
// is prefixed to the message.

/// out = a * b
void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out, const char* what = "matmul");
/// out += a^T * b
void matmul_at_b_acc(const Tensor2& a, const Tensor2& b, Tensor2& out, const char* what = "matmul_at_b");
/// out = a * b^T
void matmul_a_bt(const Tensor2& a, const Tensor2& b, Tensor2& out, const char* what = "matmul_a_bt");
/// Adds the 1 x cols bias row to every row of m.
void add_row_bias(Tensor2& m, const Tensor2& bias);
/// bias_grad += column sums of g
void column_sums_acc(const Tensor2& g, Tensor2& bias_grad);

std::string shape_string(const Tensor2& t);

}  // namespace lvn
