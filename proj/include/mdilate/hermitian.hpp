#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mdilate/matrix.hpp"
#include "mdilate/tolerances.hpp"

namespace mdilate {

/// A square matrix validated as Hermitian and stored symmetrized, (X + X^*)/2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  /// Zero matrix of dimension n.
  explicit HermitianMatrix(std::size_t n) : base_(n, n) {}

  /// Throws not_hermitian when max|X - X^*| > herm_tol * (1 + max|X|).
  static HermitianMatrix from(const ComplexMatrix& x, double herm_tol = Tolerances{}.herm);
  static HermitianMatrix identity(std::size_t n);
  static HermitianMatrix diagonal(std::span<const double> values);

  const ComplexMatrix& matrix() const noexcept { return base_; }
  std::size_t dim() const noexcept { return base_.rows(); }
  double hermit_defect() const noexcept { return defect_; }
  double max_norm() const noexcept { return base_.max_norm(); }
  const Complex& operator()(std::size_t i, std::size_t j) const { return base_(i, j); }

  HermitianMatrix leading(std::size_t k) const;
  HermitianMatrix operator-() const;
  HermitianMatrix scaled(double s) const;

  friend HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b);
  friend HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b);
  friend bool operator==(const HermitianMatrix& a, const HermitianMatrix& b) {
    return a.base_ == b.base_;
  }

 private:
  ComplexMatrix base_;
  double defect_ = 0.0;
};

/// Congruence C^* X C, returned Hermitian.
HermitianMatrix congruence(const ComplexMatrix& c, const HermitianMatrix& x);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  ComplexMatrix basis;         // unitary, columns are eigenvectors

  /// V diag(f(lambda)) V^*.
  template <typename F>
  HermitianMatrix apply(F&& f) const;
};

struct EighOptions {
  int max_sweeps = Tolerances{}.eig_sweeps;
  double eig_tol = Tolerances{}.eig;
};

/// Cyclic complex Jacobi. Throws no_convergence when the sweep budget runs
/// out or the reconstruction/unitarity residuals exceed eig_tol.
EigenDecomposition eigh(const HermitianMatrix& x, const EighOptions& options = {});

/// Principal square root of a PSD matrix; eigenvalues in [-psd_tol(1+|X|), 0)
/// are clamped to zero, anything more negative is not_psd.
HermitianMatrix sqrt_psd(const HermitianMatrix& x, const Tolerances& tol = {});

struct PinvSqrt {
  HermitianMatrix inv_sqrt;          // X^{+1/2}
  HermitianMatrix range_projector;   // projector onto the numerical range
  std::size_t rank = 0;
  ComplexMatrix range_basis;         // dim x rank, orthonormal columns
  std::vector<double> range_values;  // eigenvalues kept, matching range_basis
};

/// Eigenvalues <= rank_tol * lambda_max are treated as kernel.
PinvSqrt pinv_sqrt(const HermitianMatrix& x, const Tolerances& tol = {});

/// sum_k coeffs[k] * n^k. Throws not_hermitian if the coefficients fail to
/// commute within comm_tol.
HermitianMatrix poly_eval(std::span<const HermitianMatrix> coeffs, long long n,
                          const Tolerances& tol = {});
/// Same evaluation without the commutation check.
HermitianMatrix poly_eval_unchecked(std::span<const HermitianMatrix> coeffs, long long n);

struct PsdCheck {
  bool is_psd = false;
  double min_eig = 0.0;
};

/// is_psd iff min_eig >= -tol * (1 + max|X|). An empty matrix is PSD with min_eig 0.
PsdCheck psd_check(const HermitianMatrix& x, double tol = Tolerances{}.psd);

/// Numerical rank of an arbitrary matrix by column-pivoted Gram-Schmidt;
/// columns whose residual norm drops below rel_tol * (largest column norm)
/// are treated as dependent.
std::size_t numerical_rank(const ComplexMatrix& columns, double rel_tol);

template <typename F>
HermitianMatrix EigenDecomposition::apply(F&& f) const {
  const std::size_t n = values.size();
  ComplexMatrix scaled = basis;
  for (std::size_t j = 0; j < n; ++j) {
    const double fj = f(values[j]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= fj;
  }
  ComplexMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      Complex s{};
      for (std::size_t j = 0; j < n; ++j) s += scaled(i, j) * std::conj(basis(k, j));
      r(i, k) = s;
    }
  return HermitianMatrix::from(r, 1e-6);
}

}  // namespace mdilate
