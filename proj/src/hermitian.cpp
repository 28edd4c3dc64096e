#include "mdilate/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mdilate/errors.hpp"

namespace mdilate {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_finite(const ComplexMatrix& m, const char* op) {
  if (!m.all_finite()) throw Error(ErrorCode::non_finite, std::string(op) + " produced non-finite entries");
}

// One Jacobi rotation zeroing a(p, q). The unitary J acts on columns p, q as
//   [ c            s         ]
//   [ -s conj(e)   c conj(e) ]
// with e the phase of a(p, q); A <- J^* A J, V <- V J.
void rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
  const std::size_t n = a.rows();
  const Complex apq = a(p, q);
  const double mag = std::abs(apq);
  const Complex e = apq / mag;
  const Complex ec = std::conj(e);
  const double app = a(p, p).real(), aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * mag);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  for (std::size_t k = 0; k < n; ++k) {
    const Complex akp = a(k, p), akq = a(k, q);
    a(k, p) = c * akp - s * ec * akq;
    a(k, q) = s * akp + c * ec * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Complex apk = a(p, k), aqk = a(q, k);
    a(p, k) = c * apk - s * e * aqk;
    a(q, k) = s * apk + c * e * aqk;
  }
  a(p, p) = app - t * mag;
  a(q, q) = aqq + t * mag;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Complex vkp = v(k, p), vkq = v(k, q);
    v(k, p) = c * vkp - s * ec * vkq;
    v(k, q) = s * vkp + c * ec * vkq;
  }
}

double frobenius(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& z : a.data()) s += std::norm(z);
  return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// HermitianMatrix

HermitianMatrix HermitianMatrix::from(const ComplexMatrix& x, double herm_tol) {
  if (!x.is_square()) throw Error(ErrorCode::dimension_mismatch, "Hermitian matrix must be square");
  require_finite(x, "HermitianMatrix::from");
  const std::size_t n = x.rows();
  HermitianMatrix h;
  h.base_ = ComplexMatrix(n, n);
  double defect = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Complex a = x(i, j), b = std::conj(x(j, i));
      defect = std::max(defect, std::abs(a - b));
      const Complex avg = 0.5 * (a + b);
      h.base_(i, j) = avg;
      h.base_(j, i) = std::conj(avg);
    }
    h.base_(i, i) = h.base_(i, i).real();
  }
  h.defect_ = defect;
  if (defect > herm_tol * (1.0 + x.max_norm())) {
    std::ostringstream os;
    os << "max|X - X^*| = " << defect;
    throw Error(ErrorCode::not_hermitian, os.str());
  }
  return h;
}

HermitianMatrix HermitianMatrix::identity(std::size_t n) {
  HermitianMatrix h;
  h.base_ = ComplexMatrix::identity(n);
  return h;
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> values) {
  HermitianMatrix h;
  h.base_ = ComplexMatrix::diagonal(values);
  require_finite(h.base_, "HermitianMatrix::diagonal");
  return h;
}

HermitianMatrix HermitianMatrix::leading(std::size_t k) const {
  HermitianMatrix h;
  h.base_ = base_.leading(k);
  h.defect_ = defect_;
  return h;
}

HermitianMatrix HermitianMatrix::operator-() const { return scaled(-1.0); }

HermitianMatrix HermitianMatrix::scaled(double s) const {
  HermitianMatrix h = *this;
  h.base_ *= s;
  return h;
}

HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
  HermitianMatrix h = a;
  h.base_ += b.base_;
  return h;
}

HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
  HermitianMatrix h = a;
  h.base_ -= b.base_;
  return h;
}

HermitianMatrix congruence(const ComplexMatrix& c, const HermitianMatrix& x) {
  return HermitianMatrix::from(adjoint_times(c, x.matrix() * c), 1e-6);
}

// ---------------------------------------------------------------------------
// eigh

EigenDecomposition eigh(const HermitianMatrix& x, const EighOptions& options) {
  const std::size_t n = x.dim();
  ComplexMatrix a = x.matrix();
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double tiny = 1e-18 * frobenius(a);

  bool converged = n < 2;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    std::size_t rotations = 0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        const double diag_scale = std::sqrt(std::abs(a(p, p).real()) * std::abs(a(q, q).real()));
        if (mag <= std::max(kEps * diag_scale, tiny)) continue;
        rotate(a, v, p, q);
        ++rotations;
      }
    }
    converged = rotations == 0;
  }
  if (!converged) {
    std::ostringstream os;
    os << "Jacobi did not converge within " << options.max_sweeps << " sweeps (n = " << n << ")";
    throw Error(ErrorCode::no_convergence, os.str());
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() < a(j, j).real();
  });
  EigenDecomposition d;
  d.values.resize(n);
  d.basis = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    d.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) d.basis(i, k) = v(i, order[k]);
  }
  require_finite(d.basis, "eigh");

  // reconstruction and unitarity
  const double unitarity = distance_to_identity(adjoint_times(d.basis, d.basis));
  ComplexMatrix scaled = d.basis;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= d.values[j];
  const double recon = max_abs_diff(x.matrix(), scaled * d.basis.adjoint());
  if (unitarity > options.eig_tol || recon > options.eig_tol * (1.0 + x.max_norm())) {
    std::ostringstream os;
    os << "eigendecomposition residuals too large (reconstruction " << recon << ", unitarity "
       << unitarity << ")";
    throw Error(ErrorCode::no_convergence, os.str());
  }
  return d;
}

// ---------------------------------------------------------------------------
// functional calculus

HermitianMatrix sqrt_psd(const HermitianMatrix& x, const Tolerances& tol) {
  const auto d = eigh(x, {tol.eig_sweeps, tol.eig});
  const double scale = 1.0 + x.max_norm();
  if (!d.values.empty() && d.values.front() < -tol.psd * scale) {
    std::ostringstream os;
    os << "min eigenvalue " << d.values.front() << " below -" << tol.psd * scale;
    throw Error(ErrorCode::not_psd, os.str());
  }
  HermitianMatrix r = d.apply([](double l) { return l > 0.0 ? std::sqrt(l) : 0.0; });
  const double resid = max_abs_diff(r.matrix() * r.matrix(), x.matrix());
  // Clamped eigenvalues contribute at most psd_tol * scale to the residual.
  if (resid > (tol.sqrt + tol.psd) * scale) {
    std::ostringstream os;
    os << "square root reconstruction residual " << resid;
    throw Error(ErrorCode::no_convergence, os.str());
  }
  return r;
}

PinvSqrt pinv_sqrt(const HermitianMatrix& x, const Tolerances& tol) {
  const auto d = eigh(x, {tol.eig_sweeps, tol.eig});
  const std::size_t n = x.dim();
  const double scale = 1.0 + x.max_norm();
  if (n > 0 && d.values.front() < -tol.psd * scale) {
    std::ostringstream os;
    os << "min eigenvalue " << d.values.front() << " below -" << tol.psd * scale;
    throw Error(ErrorCode::not_psd, os.str());
  }
  const double lmax = n > 0 ? std::max(d.values.back(), 0.0) : 0.0;
  const double cutoff = tol.rank * lmax;
  auto kept = [&](double l) { return lmax > 0.0 && l > cutoff; };

  PinvSqrt out;
  out.inv_sqrt = d.apply([&](double l) { return kept(l) ? 1.0 / std::sqrt(l) : 0.0; });
  out.range_projector = d.apply([&](double l) { return kept(l) ? 1.0 : 0.0; });
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < n; ++j)
    if (kept(d.values[j])) cols.push_back(j);
  out.rank = cols.size();
  out.range_basis = ComplexMatrix(n, cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.range_values.push_back(d.values[cols[k]]);
    for (std::size_t i = 0; i < n; ++i) out.range_basis(i, k) = d.basis(i, cols[k]);
  }
  return out;
}

HermitianMatrix poly_eval_unchecked(std::span<const HermitianMatrix> coeffs, long long n) {
  if (coeffs.empty()) return HermitianMatrix{};
  HermitianMatrix acc(coeffs.front().dim());
  double power = 1.0;
  for (const auto& c : coeffs) {
    acc = acc + c.scaled(power);
    power *= static_cast<double>(n);
  }
  return acc;
}

HermitianMatrix poly_eval(std::span<const HermitianMatrix> coeffs, long long n,
                          const Tolerances& tol) {
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    for (std::size_t j = i + 1; j < coeffs.size(); ++j) {
      const auto& a = coeffs[i].matrix();
      const auto& b = coeffs[j].matrix();
      const double comm = max_abs_diff(a * b, b * a);
      if (comm > tol.comm * (1.0 + a.max_norm() * b.max_norm())) {
        std::ostringstream os;
        os << "coefficients " << i << " and " << j << " do not commute (" << comm << ")";
        throw Error(ErrorCode::not_hermitian, os.str());
      }
    }
  }
  return poly_eval_unchecked(coeffs, n);
}

PsdCheck psd_check(const HermitianMatrix& x, double tol) {
  if (x.dim() == 0) return {true, 0.0};
  const auto d = eigh(x);
  const double min_eig = d.values.front();
  return {min_eig >= -tol * (1.0 + x.max_norm()), min_eig};
}

// ---------------------------------------------------------------------------
// rank

std::size_t numerical_rank(const ComplexMatrix& columns, double rel_tol) {
  const std::size_t rows = columns.rows(), ncols = columns.cols();
  std::vector<ComplexVector> cols(ncols, ComplexVector(rows));
  std::vector<double> norms(ncols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto r = columns.row(i);
    for (std::size_t j = 0; j < ncols; ++j) cols[j][i] = r[j];
  }
  double largest = 0.0;
  for (std::size_t j = 0; j < ncols; ++j) {
    norms[j] = norm(cols[j]);
    largest = std::max(largest, norms[j]);
  }
  if (largest == 0.0) return 0;

  std::vector<bool> used(ncols, false);
  std::vector<ComplexVector> basis;
  const std::size_t max_rank = std::min(rows, ncols);
  while (basis.size() < max_rank) {
    std::size_t pick = ncols;
    double best = 0.0;
    for (std::size_t j = 0; j < ncols; ++j)
      if (!used[j] && norms[j] > best) {
        best = norms[j];
        pick = j;
      }
    if (pick == ncols || best <= rel_tol * largest) break;
    used[pick] = true;
    ComplexVector q = std::move(cols[pick]);
    // one reorthogonalization pass against the accepted basis
    for (const auto& b : basis) {
      const Complex c = inner(q, b);
      for (std::size_t i = 0; i < rows; ++i) q[i] -= c * b[i];
    }
    const double qn = norm(q);
    if (qn <= rel_tol * largest) continue;
    for (auto& z : q) z /= qn;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (used[j]) continue;
      auto& cj = cols[j];
      const Complex c = inner(cj, q);
      double s = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        cj[i] -= c * q[i];
        s += std::norm(cj[i]);
      }
      norms[j] = std::sqrt(s);
    }
    basis.push_back(std::move(q));
  }
  return basis.size();
}

}  // namespace mdilate
