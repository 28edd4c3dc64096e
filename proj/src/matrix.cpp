#include "mdilate/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdilate/errors.hpp"

namespace mdilate {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << op << ": " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw Error(ErrorCode::dimension_mismatch, os.str());
  }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    std::ostringstream os;
    os << "expected " << rows * cols << " entries, got " << data_.size();
    throw Error(ErrorCode::dimension_mismatch, os.str());
  }
  if (!all_finite()) throw Error(ErrorCode::non_finite, "matrix entries must be finite");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

ComplexMatrix ComplexMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr,
                                   std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_)
    throw Error(ErrorCode::dimension_mismatch, "block out of range");
  ComplexMatrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    std::copy_n(data_.begin() + (r0 + i) * cols_ + c0, nc, b.data_.begin() + i * nc);
  return b;
}

void ComplexMatrix::set_block(std::size_t r0, std::size_t c0, const ComplexMatrix& b) {
  if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_)
    throw Error(ErrorCode::dimension_mismatch, "set_block out of range");
  for (std::size_t i = 0; i < b.rows_; ++i)
    std::copy_n(b.data_.begin() + i * b.cols_, b.cols_,
                data_.begin() + (r0 + i) * cols_ + c0);
}

ComplexMatrix ComplexMatrix::padded(std::size_t n) const {
  if (rows_ > n || cols_ > n) throw Error(ErrorCode::dimension_mismatch, "padded: too small");
  ComplexMatrix p(n, n);
  p.set_block(0, 0, *this);
  return p;
}

ComplexVector ComplexMatrix::column(std::size_t j) const {
  ComplexVector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

std::vector<double> ComplexMatrix::real_diagonal() const {
  std::vector<double> d(std::min(rows_, cols_));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i).real();
  return d;
}

double ComplexMatrix::max_norm() const noexcept {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

bool ComplexMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "product " << a.rows() << "x" << a.cols() << " * " << b.rows() << "x" << b.cols();
    throw Error(ErrorCode::dimension_mismatch, os.str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  ComplexMatrix c(n, m);
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < n; ++i) {
    Complex* crow = cd.data() + i * m;
    for (std::size_t l = 0; l < k; ++l) {
      const Complex ail = a(i, l);
      if (ail == Complex{}) continue;
      const Complex* brow = bd.data() + l * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += ail * brow[j];
    }
  }
  return c;
}

ComplexVector operator*(const ComplexMatrix& a, std::span<const Complex> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::dimension_mismatch, "matrix-vector product");
  ComplexVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex s{};
    auto r = a.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

ComplexMatrix adjoint_times(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::dimension_mismatch, "adjoint_times");
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
  ComplexMatrix c(n, m);
  auto cd = c.data();
  for (std::size_t l = 0; l < k; ++l) {
    auto arow = a.row(l);
    auto brow = b.row(l);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex ali = std::conj(arow[i]);
      if (ali == Complex{}) continue;
      Complex* crow = cd.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += ali * brow[j];
    }
  }
  return c;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto ad = a.data(), bd = b.data();
  for (std::size_t k = 0; k < ad.size(); ++k) m = std::max(m, std::abs(ad[k] - bd[k]));
  return m;
}

double distance_to_identity(const ComplexMatrix& x) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      m = std::max(m, std::abs(x(i, j) - (i == j ? 1.0 : 0.0)));
  return m;
}

double off_diagonal_norm(const ComplexMatrix& x) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (i != j) m = std::max(m, std::abs(x(i, j)));
  return m;
}

double norm_squared(std::span<const Complex> x) noexcept {
  double s = 0.0;
  for (const auto& z : x) s += std::norm(z);
  return s;
}

double norm(std::span<const Complex> x) noexcept { return std::sqrt(norm_squared(x)); }

Complex inner(std::span<const Complex> x, std::span<const Complex> y) noexcept {
  Complex s{};
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) s += x[i] * std::conj(y[i]);
  return s;
}

ComplexMatrix inverse(const ComplexMatrix& a, double pivot_tol) {
  if (!a.is_square()) throw Error(ErrorCode::dimension_mismatch, "inverse of non-square matrix");
  const std::size_t n = a.rows();
  ComplexMatrix lu = a;
  ComplexMatrix inv = ComplexMatrix::identity(n);
  const double scale = std::max(a.max_norm(), 1e-300);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (std::abs(lu(piv, k)) <= pivot_tol * scale)
      throw Error(ErrorCode::not_invertible, "singular pivot in LU factorization");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(lu(k, j), lu(piv, j));
        std::swap(inv(k, j), inv(piv, j));
      }
    }
    const Complex d = lu(k, k);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const Complex f = lu(i, k) / d;
      if (f == Complex{}) continue;
      for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < n; ++j) inv(i, j) -= f * inv(k, j);
    }
    for (std::size_t j = k; j < n; ++j) lu(k, j) /= d;
    for (std::size_t j = 0; j < n; ++j) inv(k, j) /= d;
  }
  return inv;
}

}  // namespace mdilate
