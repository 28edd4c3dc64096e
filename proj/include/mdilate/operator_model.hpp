#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mdilate/hermitian.hpp"
#include "mdilate/matrix.hpp"
#include "mdilate/tolerances.hpp"

namespace mdilate {

/// Closed-form generator of scalar shift weights w_1, w_2, ...
struct WeightRule {
  enum class Kind { constant, dirichlet, geometric_concave, table };

  Kind kind = Kind::constant;
  double c = 1.0;              // constant(c)
  double r = 0.5;              // geometric_concave(r): w_j^2 = 1 + r^j
  std::vector<double> values;  // table: w_1..w_k, then `tail`
  double tail = 1.0;

  static WeightRule constant(double c);
  static WeightRule dirichlet();
  static WeightRule geometric_concave(double r);
  static WeightRule table(std::vector<double> values, double tail);

  /// Throws invalid_rule for r outside (0,1) or nonpositive weights.
  void validate() const;
  /// w_j^2 for j >= 1.
  double weight_sq(std::size_t j) const;
  double weight(std::size_t j) const;
  std::string name() const;

  friend bool operator==(const WeightRule&, const WeightRule&) = default;
};

/// Leading block of a computed corner whose entries agree with the infinite operator.
struct ExactWindow {
  std::size_t valid_dim = 0;
  friend bool operator==(const ExactWindow&, const ExactWindow&) = default;
};

/// N x N upper-left corner of a (possibly infinite) banded operator.
///
/// `exact` marks a truncation of an infinite operator: every banded product
/// shrinks the trustworthy window by the total bandwidth. Finite operators
/// (exact == false) are complete and never shrink.
struct OperatorCorner {
  ComplexMatrix matrix;
  std::size_t lower_band = 0;
  std::size_t upper_band = 0;
  bool exact = false;
  std::optional<WeightRule> rule;

  std::size_t dim() const noexcept { return matrix.rows(); }
  std::size_t bandwidth() const noexcept { return lower_band + upper_band; }
  /// Window remaining after `ops` banded products; throws window_exhausted
  /// when nothing is left.
  ExactWindow window_after(std::size_t ops) const;
};

OperatorCorner make_shift_corner(const WeightRule& rule, std::size_t n);
/// Free-standing finite-dimensional operator; bands are measured from the entries.
OperatorCorner make_finite_operator(ComplexMatrix matrix);

double binomial(int m, int k);

struct BetaForm {
  HermitianMatrix value;
  ExactWindow window;
};

/// beta_m(T) = sum_k (-1)^{m-k} C(m,k) T^{*k} T^k on the full corner, with the
/// window on which it is exact.
BetaForm beta_form(const OperatorCorner& t, int m);

struct PowerWindow {
  ComplexMatrix value;
  ExactWindow window;
};

PowerWindow power_window(const OperatorCorner& t, std::size_t n);

struct FlagResidual {
  bool flag = false;
  double residual = 0.0;
};

struct Classification {
  int m = 0;
  FlagResidual expansive;    // min eig beta_1
  FlagResidual m_concave;    // min eig of -beta_m
  FlagResidual m_isometric;  // max |beta_m|
  FlagResidual delta_psd;    // min eig beta_{m-1}
  ExactWindow beta_m_window;
  ExactWindow delta_window;
};

/// Each flag is evaluated on the exact window of its own form.
Classification classify(const OperatorCorner& t, int m, const Tolerances& tol = {});

/// Diagonal of beta_m for the weighted shift generated by `rule`, entries
/// n = 0..count-1, from the weights directly (no truncation involved).
std::vector<double> shift_beta_diagonal(const WeightRule& rule, int m, std::size_t count);

/// prod_{j=1}^{n} w_j^2 for n = 0..count-1.
std::vector<double> shift_weight_products(const WeightRule& rule, std::size_t count);

}  // namespace mdilate
