#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdilate/dilation.hpp"
#include "mdilate/tolerances.hpp"

namespace mdilate {

/// passed iff residual <= tolerance.
struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string window;
};

CheckResult make_check(std::string name, double residual, double tolerance, std::string window);

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool overall = true;  // conjunction of checks[i].passed

  void add(CheckResult check);
  const CheckResult* find(const std::string& name) const;
};

inline constexpr std::uint64_t kDefaultSeed = 0xD11A710;
inline constexpr std::size_t kDefaultTrials = 32;

struct TrialOptions {
  std::size_t trials = kDefaultTrials;
  std::uint64_t seed = kDefaultSeed;
};

/// W x using the block layout (never touches the zero blocks).
ComplexVector apply_w(const AssembledDilation& d, std::span<const Complex> x);

/// Largest H coordinate count whose vectors h keep T^k h and U T^{k-1} h
/// exact for k <= m: window of the model minus m times the bandwidth.
std::size_t test_support(const AssembledDilation& d, int m);

/// Block (0,0) of W^n equals T^n for n <= n_max.
CheckResult check_dilation_property(const AssembledDilation& d, std::size_t n_max,
                                    const Tolerances& tol = {});

/// Blockwise formula for W^m h, built from T, U and the weights.
CheckResult check_powers_formula(const AssembledDilation& d, int m, const TrialOptions& opts = {},
                                 const Tolerances& tol = {});

/// |sum_k (-1)^{m-k} C(m,k) ||W^k x||^2| / ||x||^2 on windowed random x.
CheckResult check_w_m_isometry(const AssembledDilation& d, int m, const TrialOptions& opts = {},
                               const Tolerances& tol = {});

/// <beta_m h, h> + sum_l (-1)^{m-l} C(m,l) sum_{k<=l} ||S_{k-1}..S_1 U T^{l-k} h||^2 = 0.
CheckResult check_criterion_identity(const AssembledDilation& d, const TrialOptions& opts = {},
                                     const Tolerances& tol = {});

/// m-th forward difference of the cumulative moduli of the weights inside W.
/// The window string names the first offending index when it fails.
CheckResult check_weight_shift_difference(const AssembledDilation& d, const Tolerances& tol = {});

/// Numerical rank of {W^n e : n <= n_blocks, e in the H block} versus total dimension.
CheckResult check_minimality(const AssembledDilation& d, const Tolerances& tol = {});

/// (||S_{m-1} - I|| <= tol) == (||beta_m||_window <= tol). Vacuous for dim H' = 0.
CheckResult remark_consistency(const AssembledDilation& d, const Tolerances& tol = {});

/// T^* U^* U T = U^* U on the window shrunk by one band.
CheckResult check_u_stein(const AssembledDilation& d, const Tolerances& tol = {});

/// A <= 0, B^2 = I - A, p(k) = I for k <= m-2, p(m-1) = B^2, S_{m-1} = B,
/// cumulative[n] = p(n).
CheckResult check_model_invariants(const AssembledDilation& d, const Tolerances& tol = {});

/// Stein and dominance residuals of Q on the model window.
std::vector<CheckResult> check_q_contract(const DilationModel& model, const Tolerances& tol = {});

/// Diagonal closed-form route versus the dense eig/pinv route for a shift model:
/// A, B, S_1..S_k and q_0..q_k.
CheckResult check_oracle_equivalence(const DilationModel& model, const WeightRule& rule,
                                     std::size_t horizon, std::size_t count = 8,
                                     const Tolerances& tol = {});

struct Certificate {
  bool found = false;
  double gap = 0.0;           // max over unit h of |(||W h||^2 - ||W' h||^2)|
  double gap_e0 = 0.0;        // the same at h = e_0
  ComplexVector witness;      // maximizing h in H coordinates
  double tolerance = 0.0;
  std::size_t support = 0;    // H coordinates searched
  double identity_residual = 0.0;  // max-norm of (G - G') - beta_1 on the support
};

/// Norm-gap obstruction between two dilations of the same T.
Certificate nonisomorphism_certificate(const AssembledDilation& general,
                                       const AssembledDilation& badea,
                                       const Tolerances& tol = {});

/// Every check that applies to the path of `d`.
VerificationReport verify_dilation(const AssembledDilation& d, const TrialOptions& opts = {},
                                   const Tolerances& tol = {});

/// Copy of `d` with S_n replaced by S_n + delta I in both W and the weight list.
AssembledDilation perturb_weight(const AssembledDilation& d, std::size_t n, double delta);

/// Copy of `d` with U replaced by zero (negative control for minimality).
AssembledDilation zero_u(const AssembledDilation& d);

}  // namespace mdilate
