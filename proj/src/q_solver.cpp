#include "mdilate/q_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdilate/errors.hpp"

namespace mdilate {

namespace {

QSolution diagonal_solution(std::span<const double> weight_sq_next,
                            std::span<const double> products, std::span<const double> delta,
                            std::size_t horizon, std::size_t corner_dim,
                            std::optional<double> q0_override, const Tolerances& tol) {
  const std::size_t count = horizon + 1;
  if (delta.size() < count || products.size() < count)
    throw Error(ErrorCode::dimension_mismatch, "delta diagonal must cover 0..horizon");
  if (corner_dim > count)
    throw Error(ErrorCode::dimension_mismatch, "horizon shorter than the corner");
  for (std::size_t n = 0; n < count; ++n)
    if (delta[n] < -tol.psd * (1.0 + std::abs(delta[n]))) {
      std::ostringstream os;
      os << "delta_" << n << " = " << delta[n] << " is negative";
      throw Error(ErrorCode::not_psd, os.str());
    }

  std::vector<double> scaled(count);
  for (std::size_t n = 0; n < count; ++n) scaled[n] = std::max(delta[n], 0.0) * products[n];
  double q0 = plateau_sup(scaled, tol.plateau);
  if (q0_override) {
    if (*q0_override < q0 * (1.0 - tol.plateau)) {
      std::ostringstream os;
      os << "q0 override " << *q0_override << " is below the minimal q0 " << q0;
      throw Error(ErrorCode::precondition_failed, os.str());
    }
    q0 = *q0_override;
  }

  QSolution sol;
  sol.method = q0 == 0.0 ? QSolution::Method::zero : QSolution::Method::diagonal_shift;
  std::vector<double> q(count);
  for (std::size_t n = 0; n < count; ++n) q[n] = q0 / products[n];

  double stein = 0.0, dominance = q[0] - delta[0];
  for (std::size_t n = 0; n + 1 < count; ++n)
    stein = std::max(stein, std::abs(weight_sq_next[n] * q[n + 1] - q[n]));
  for (std::size_t n = 0; n < count; ++n) dominance = std::min(dominance, q[n] - delta[n]);
  sol.stein_residual = stein;
  sol.dominance_residual = dominance;
  sol.q = HermitianMatrix::diagonal(std::span<const double>(q).first(corner_dim));
  sol.q_seq = std::move(q);
  return sol;
}

double spectral_norm(const ComplexMatrix& a) {
  if (a.empty()) return 0.0;
  const auto g = HermitianMatrix::from(adjoint_times(a, a), 1e-6);
  const auto d = eigh(g);
  return std::sqrt(std::max(d.values.back(), 0.0));
}

}  // namespace

std::string to_string(QSolution::Method method) {
  switch (method) {
    case QSolution::Method::diagonal_shift: return "diagonal_shift";
    case QSolution::Method::fixed_point: return "fixed_point";
    case QSolution::Method::zero: return "zero";
  }
  return "";
}

double plateau_sup(std::span<const double> values, double rel_tol) {
  if (values.empty()) return 0.0;
  const std::size_t h = values.size() - 1;
  std::vector<double> running(values.size());
  double m = values[0];
  for (std::size_t n = 0; n <= h; ++n) {
    m = std::max(m, values[n]);
    running[n] = m;
  }
  const double sup = running[h];
  if (sup <= 0.0) return 0.0;
  const double floor = sup * (1.0 - rel_tol);
  std::size_t argmax = 0;
  while (values[argmax] < floor) ++argmax;
  const std::size_t three_quarters = (3 * h) / 4;
  if (argmax > h / 2 || running[three_quarters] < floor) {
    std::ostringstream os;
    os << "sup of delta_n * prod w_j^2 still rising: first attained at n = " << argmax
       << " of horizon " << h;
    throw Error(ErrorCode::q0_unbounded, os.str());
  }
  return sup;
}

QSolution solve_q_shift_diagonal(const WeightRule& rule, std::span<const double> delta_diag,
                                 std::size_t horizon, std::size_t corner_dim,
                                 std::optional<double> q0_override, const Tolerances& tol) {
  const auto products = shift_weight_products(rule, horizon + 1);
  std::vector<double> next(horizon + 1);
  for (std::size_t n = 0; n <= horizon; ++n) next[n] = rule.weight_sq(n + 1);
  return diagonal_solution(next, products, delta_diag, horizon, corner_dim, q0_override, tol);
}

QSolution solve_q_shift_dense(const OperatorCorner& t, const HermitianMatrix& delta,
                              std::size_t horizon, std::size_t corner_dim,
                              const Tolerances& tol) {
  if (t.dim() <= horizon + 1 || delta.dim() <= horizon)
    throw Error(ErrorCode::window_exhausted, "dense shift corner must exceed the horizon");
  std::vector<double> products(horizon + 1), next(horizon + 1), diag(horizon + 1);
  ComplexVector v(t.dim());
  v[0] = 1.0;
  for (std::size_t n = 0; n <= horizon; ++n) {
    if (n > 0) v = t.matrix * std::span<const Complex>(v);
    products[n] = std::norm(v[n]);
    next[n] = std::norm(t.matrix(n + 1, n));
    diag[n] = delta(n, n).real();
  }
  return diagonal_solution(next, products, diag, horizon, corner_dim, std::nullopt, tol);
}

QSolution solve_q_fixed_point(const OperatorCorner& t, const HermitianMatrix& delta,
                              const Tolerances& tol) {
  if (t.exact)
    throw Error(ErrorCode::precondition_failed,
                "fixed-point solver needs a finite-dimensional operator");
  const std::size_t n = t.dim();
  if (delta.dim() != n) throw Error(ErrorCode::dimension_mismatch, "delta size");

  const ComplexMatrix tinv = inverse(t.matrix);
  const double inv_norm = spectral_norm(tinv);
  if (inv_norm > 1.0 + tol.psd) {
    std::ostringstream os;
    os << "||T^-1|| = " << inv_norm << " exceeds 1 (T is not expansive)";
    throw Error(ErrorCode::precondition_failed, os.str());
  }
  const auto dcheck = psd_check(delta, tol.psd);
  if (!dcheck.is_psd) {
    std::ostringstream os;
    os << "Delta has eigenvalue " << dcheck.min_eig;
    throw Error(ErrorCode::not_psd, os.str());
  }
  const auto gate = psd_check(delta - congruence(t.matrix, delta), tol.psd);
  if (!gate.is_psd) {
    std::ostringstream os;
    os << "T^* Delta T <= Delta fails (min eig " << gate.min_eig << ")";
    throw Error(ErrorCode::precondition_failed, os.str());
  }

  QSolution sol;
  sol.method = QSolution::Method::fixed_point;
  HermitianMatrix q = delta;
  double min_step = 0.0;
  bool converged = false;
  for (int k = 0; k < tol.fixed_point_iterations; ++k) {
    HermitianMatrix next = congruence(tinv, q);
    const HermitianMatrix step = next - q;
    min_step = std::min(min_step, psd_check(step).min_eig);
    q = std::move(next);
    sol.iterations = static_cast<std::size_t>(k) + 1;
    if (step.max_norm() <= tol.fixed_point_step * (1.0 + q.max_norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "fixed-point iteration did not settle in " << tol.fixed_point_iterations << " steps";
    throw Error(ErrorCode::no_convergence, os.str());
  }
  sol.min_step_eig = min_step;
  const auto res = verify_q(t, q, delta, {n});
  sol.stein_residual = res.stein_residual;
  sol.dominance_residual = res.dominance_residual;
  if (q.max_norm() == 0.0) sol.method = QSolution::Method::zero;
  sol.q = std::move(q);
  return sol;
}

QResiduals verify_q(const OperatorCorner& t, const HermitianMatrix& q,
                    const HermitianMatrix& delta, ExactWindow window) {
  if (q.dim() != t.dim() || delta.dim() < window.valid_dim || q.dim() < window.valid_dim)
    throw Error(ErrorCode::dimension_mismatch, "verify_q dimensions");
  const std::size_t w = window.valid_dim;
  const ComplexMatrix stein = adjoint_times(t.matrix, q.matrix() * t.matrix) - q.matrix();
  QResiduals r;
  r.stein_residual = stein.leading(w).max_norm();
  r.dominance_residual = psd_check(q.leading(w) - delta.leading(w)).min_eig;
  return r;
}

}  // namespace mdilate
