#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mdilate {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Dense complex matrix, row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const double> values);
  static ComplexMatrix diagonal(std::span<const Complex> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  ComplexMatrix adjoint() const;
  ComplexMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  /// Leading k x k principal block.
  ComplexMatrix leading(std::size_t k) const { return block(0, 0, k, k); }
  void set_block(std::size_t r0, std::size_t c0, const ComplexMatrix& b);
  /// Embeds this matrix as the leading block of an n x n zero matrix.
  ComplexMatrix padded(std::size_t n) const;

  ComplexVector column(std::size_t j) const;
  std::vector<double> real_diagonal() const;

  double max_norm() const noexcept;
  bool all_finite() const noexcept;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(Complex s);

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector operator*(const ComplexMatrix& a, std::span<const Complex> x);

/// a^* b without forming the adjoint.
ComplexMatrix adjoint_times(const ComplexMatrix& a, const ComplexMatrix& b);

/// max |a_ij - b_ij|; dimensions must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
/// Max-norm of X - I.
double distance_to_identity(const ComplexMatrix& x);
/// Max-norm of the strictly off-diagonal part.
double off_diagonal_norm(const ComplexMatrix& x);

double norm_squared(std::span<const Complex> x) noexcept;
double norm(std::span<const Complex> x) noexcept;
Complex inner(std::span<const Complex> x, std::span<const Complex> y) noexcept;  // <x, y> = y^* x

/// Inverse by LU with partial pivoting; throws not_invertible when a pivot
/// falls below `pivot_tol` times the largest entry.
ComplexMatrix inverse(const ComplexMatrix& a, double pivot_tol = 1e-14);

}  // namespace mdilate
