#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mdilate/hermitian.hpp"
#include "mdilate/operator_model.hpp"
#include "mdilate/q_solver.hpp"
#include "mdilate/tolerances.hpp"

namespace mdilate {

enum class DilationPath { general_m, three_concave, badea_2iso };

std::string to_string(DilationPath path);

/// Everything the block construction needs. Operators on H' are stored in
/// the orthonormal basis `hprime_basis` (columns in H coordinates), which
/// spans the numerical range of Q^{1/2} (resp. Delta^{1/2}, (Q - beta_1)^{1/2})
/// restricted to `window`.
struct DilationModel {
  int m = 0;
  DilationPath path = DilationPath::general_m;
  OperatorCorner t;
  HermitianMatrix delta;        // beta_{m-1}(T), full corner
  std::optional<QSolution> q;   // general_m and badea_2iso
  ComplexMatrix u;              // H -> H', dim H' x N
  ComplexMatrix hprime_basis;   // N x dim H'
  HermitianMatrix a;
  HermitianMatrix b;
  std::vector<HermitianMatrix> p_coeffs;  // monomial coefficients, degree <= m-1
  double ratio_bound_c = 0.0;
  double rayleigh_bound = 0.0;  // max(||B||^2, C)
  double welldef_residual = 0.0;
  ExactWindow window;           // H coordinates on which H' and A are exact

  std::size_t hprime_dim() const noexcept { return hprime_basis.cols(); }
};

struct ShiftWeights {
  std::vector<HermitianMatrix> weights;     // S_1, S_2, ...
  std::vector<HermitianMatrix> cumulative;  // |S_n...S_1|^2, n = 0, 1, ...
};

/// W on H_N (+) (H')^{n_blocks}. Block 0 is H; block k >= 1 sits at offset
/// N + (k-1) dim H'.
struct AssembledDilation {
  ComplexMatrix w;
  std::size_t h_dim = 0;
  std::size_t hprime_dim = 0;
  std::size_t n_blocks = 0;
  DilationModel model;
  ShiftWeights weights;

  std::size_t total_dim() const noexcept { return h_dim + n_blocks * hprime_dim; }
  std::size_t block_offset(std::size_t k) const noexcept {
    return k == 0 ? 0 : h_dim + (k - 1) * hprime_dim;
  }
  std::size_t block_size(std::size_t k) const noexcept { return k == 0 ? h_dim : hprime_dim; }
};

struct BuiltA {
  HermitianMatrix a;            // on H', dim r
  ComplexMatrix hprime_basis;   // N x r
  ComplexMatrix root;           // G^{1/2} on the window (w x w)
  double welldef_residual = 0.0;
};

/// A from <A Q^{1/2} f, Q^{1/2} g> = <beta_m f, g>, realized as
/// Q^{+1/2} beta_m Q^{+1/2} compressed to the numerical range of Q^{1/2}.
BuiltA build_A_general(const HermitianMatrix& q, const HermitianMatrix& beta_m,
                       ExactWindow window, const Tolerances& tol = {});

/// A from <A D f, D g> = <T^* beta_3 T f, g> with D = Delta^{1/2}, Delta = beta_2.
BuiltA build_A_3concave(const OperatorCorner& t, const HermitianMatrix& delta,
                        ExactWindow window, const Tolerances& tol = {});

/// Signed coefficients of z(z-1)...(z-k+1), lowest degree first.
std::vector<long long> falling_factorial_coefficients(int k);

/// sup_{n >= m-1} of the ratio of consecutive falling products; equals m.
double ratio_bound_c(int m);

struct PolynomialWeights {
  std::vector<HermitianMatrix> p_coeffs;
  ShiftWeights weights;
  double ratio_bound_c = 0.0;
};

/// p(z) = I + z(z-1)...(z-m+2)/(m-1)! (-A) and the telescoping weights
/// S_n = p(n)^{1/2} p(n-1)^{-1/2}, n = 1..horizon.
PolynomialWeights build_p_and_weights(const HermitianMatrix& a, int m, std::size_t horizon,
                                      const Tolerances& tol = {});

/// Weights plus cumulative moduli computed from an explicit weight list.
ShiftWeights make_shift_weights(std::vector<HermitianMatrix> weights);

/// Expansive m-concave path: U = Q^{1/2} on H'.
DilationModel build_general_model(const OperatorCorner& t, int m, const QSolution& q,
                                  const Tolerances& tol = {});
/// 3-concave path: U = Delta^{1/2}, Delta = beta_2(T).
DilationModel build_three_concave_model(const OperatorCorner& t, const Tolerances& tol = {});

AssembledDilation assemble_W(const DilationModel& model, const ShiftWeights& weights,
                             std::size_t n_blocks);

/// Model -> weights -> W in one step (weights up to n_blocks + m).
AssembledDilation build_dilation(const DilationModel& model, std::size_t n_blocks,
                                 const Tolerances& tol = {});

/// 2-isometric dilation with U' = (Q - beta_1(T))^{1/2} and identity weights.
AssembledDilation build_badea_2iso(const OperatorCorner& t, const QSolution& q,
                                   std::size_t n_blocks, const Tolerances& tol = {});

/// Everything-diagonal computation for scalar weighted shifts, used as an
/// oracle against the dense eigendecomposition route.
struct DiagonalShiftModel {
  std::vector<double> q;                  // q_0..q_horizon
  std::vector<bool> in_range;             // coordinate i of the window lies in H'
  std::vector<double> a;                  // per window coordinate; 0 off H'
  std::vector<double> b;                  // 1 off H'
  std::vector<std::vector<double>> s;     // s[n-1][i] = i-th diagonal of S_n; 1 off H'
};

DiagonalShiftModel build_diagonal_fast_path(const WeightRule& rule, int m, std::size_t window,
                                            std::size_t horizon, std::size_t n_weights,
                                            const Tolerances& tol = {});

}  // namespace mdilate
