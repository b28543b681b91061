#include "lvn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "lvn/error.hpp"

namespace lvn {

namespace {

[[noreturn]] void shape_fail(const char* what, const Tensor2& a, const Tensor2& b) {
  throw ShapeError(std::string(what) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

}  // namespace

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Tensor2: data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

void Tensor2::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor2::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

std::string shape_string(const Tensor2& t) {
  return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")";
}

void matmul(const Tensor2& a, const Tensor2& b, Tensor2& out, const char* what) {
  if (a.cols() != b.rows()) shape_fail(what, a, b);
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Tensor2(a.rows(), b.cols());
  else out.fill(0.0);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_at_b_acc(const Tensor2& a, const Tensor2& b, Tensor2& out, const char* what) {
  if (a.rows() != b.rows()) shape_fail(what, a, b);
  if (out.rows() != a.cols() || out.cols() != b.cols()) shape_fail(what, a, out);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t r = 0; r < n; ++r) {
    const double* brow = pb + r * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[r * k + p];
      if (av == 0.0) continue;
      double* orow = po + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_a_bt(const Tensor2& a, const Tensor2& b, Tensor2& out, const char* what) {
  if (a.cols() != b.cols()) shape_fail(what, a, b);
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = Tensor2(a.rows(), b.rows());
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = pb + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      po[i * m + j] = s;
    }
  }
}

void add_row_bias(Tensor2& m, const Tensor2& bias) {
  if (bias.rows() != 1 || bias.cols() != m.cols()) shape_fail("add_row_bias", m, bias);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias(0, j);
  }
}

void column_sums_acc(const Tensor2& g, Tensor2& bias_grad) {
  if (bias_grad.rows() != 1 || bias_grad.cols() != g.cols()) shape_fail("column_sums", g, bias_grad);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    auto r = g.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) bias_grad(0, j) += r[j];
  }
}

}  // namespace lvn
