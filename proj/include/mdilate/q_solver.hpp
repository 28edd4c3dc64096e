#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdilate/hermitian.hpp"
#include "mdilate/operator_model.hpp"
#include "mdilate/tolerances.hpp"

namespace mdilate {

/// A nonnegative Q with T^* Q T = Q and Q >= Delta, plus the residuals that
/// certify it.
struct QSolution {
  enum class Method { diagonal_shift, fixed_point, zero };

  HermitianMatrix q;
  Method method = Method::zero;
  std::optional<std::vector<double>> q_seq;  // q_0..q_horizon (diagonal case)
  double stein_residual = 0.0;
  double dominance_residual = 0.0;  // min eig of Q - Delta
  std::size_t iterations = 0;
  double min_step_eig = 0.0;        // fixed point: min over k of min eig(Q_{k+1} - Q_k)
};

std::string to_string(QSolution::Method method);

/// q_0 = max_{n <= horizon} delta_n prod_{j<=n} w_j^2 under the plateau test;
/// throws q0_unbounded when the running maximum is still rising.
double plateau_sup(std::span<const double> values, double rel_tol);

/// Minimal diagonal solution for a scalar weighted shift. `delta_diag`
/// must cover n = 0..horizon; the returned Q is the leading `corner_dim`
/// block of diag(q_n).
QSolution solve_q_shift_diagonal(const WeightRule& rule, std::span<const double> delta_diag,
                                 std::size_t horizon, std::size_t corner_dim,
                                 std::optional<double> q0_override = std::nullopt,
                                 const Tolerances& tol = {});

/// Same construction fed from a dense shift corner of size > horizon and a
/// dense Delta on it: weight products are read from the columns T^n e_0.
QSolution solve_q_shift_dense(const OperatorCorner& t, const HermitianMatrix& delta,
                              std::size_t horizon, std::size_t corner_dim,
                              const Tolerances& tol = {});

/// Monotone iteration Q <- T^{-*} Q T^{-1} from Q = Delta for finite invertible T.
/// Rejects inputs where T^* Delta T <= Delta fails.
QSolution solve_q_fixed_point(const OperatorCorner& t, const HermitianMatrix& delta,
                              const Tolerances& tol = {});

struct QResiduals {
  double stein_residual = 0.0;
  double dominance_residual = 0.0;
};

/// Stein and dominance residuals on the leading `window` block.
QResiduals verify_q(const OperatorCorner& t, const HermitianMatrix& q,
                    const HermitianMatrix& delta, ExactWindow window);

}  // namespace mdilate
