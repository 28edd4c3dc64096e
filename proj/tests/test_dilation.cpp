#include <cmath>
#include <vector>

#include "doctest.h"
#include "mdilate/dilation.hpp"
#include "mdilate/errors.hpp"
#include "test_support.hpp"

using namespace mdilate;

namespace {

OperatorCorner scalar(double t) { return make_finite_operator(ComplexMatrix(1, 1, {Complex(t)})); }

HermitianMatrix scalar_h(double v) { return HermitianMatrix::diagonal(std::vector<double>{v}); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::parse_error;
}

DilationModel shift_model(const WeightRule& rule, int m, std::size_t n, std::size_t horizon) {
  const auto t = make_shift_corner(rule, n);
  const auto delta = shift_beta_diagonal(rule, m - 1, horizon + 1);
  return build_general_model(t, m, solve_q_shift_diagonal(rule, delta, horizon, n));
}

/// The H'-operator X expressed in H coordinates: V X V^*.
ComplexMatrix in_h(const DilationModel& model, const HermitianMatrix& x) {
  const auto& v = model.hprime_basis;
  return v * x.matrix() * v.adjoint();
}

}  // namespace

TEST_CASE("falling factorial coefficients") {
  CHECK(falling_factorial_coefficients(0) == std::vector<long long>{1});
  CHECK(falling_factorial_coefficients(1) == std::vector<long long>{0, 1});
  CHECK(falling_factorial_coefficients(2) == std::vector<long long>{0, -1, 1});
  CHECK(falling_factorial_coefficients(3) == std::vector<long long>{0, 2, -3, 1});
  // evaluate against the product form
  for (int k = 0; k <= 8; ++k) {
    const auto c = falling_factorial_coefficients(k);
    for (long long z = -3; z <= 12; ++z) {
      long long poly = 0, pw = 1, prod = 1;
      for (auto ci : c) {
        poly += ci * pw;
        pw *= z;
      }
      for (int j = 0; j < k; ++j) prod *= z - j;
      CHECK(poly == prod);
    }
  }
}

TEST_CASE("ratio bound C equals m by scanning the ratio") {
  for (int m = 2; m <= 6; ++m) {
    double best = 0.0;
    for (int n = m - 1; n < 2000; ++n) {
      double num = 1.0, den = 1.0;
      for (int j = 0; j < m - 1; ++j) {
        num *= n + 1 - j;
        den *= n - j;
      }
      best = std::max(best, num / den);
    }
    CHECK(ratio_bound_c(m) == doctest::Approx(best).epsilon(1e-14));
    CHECK(ratio_bound_c(m) == doctest::Approx(double(m)));
  }
}

TEST_CASE("build_A_3concave scalar examples") {
  const double t = 1.0 / std::sqrt(2.0);
  const auto s = scalar(t);
  const auto a = build_A_3concave(s, beta_form(s, 2).value, s.window_after(4));
  REQUIRE(a.a.dim() == 1);
  CHECK(a.a(0, 0).real() == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(std::abs(a.root(0, 0).real()) == doctest::Approx(0.5).epsilon(1e-14));

  const auto z = scalar(0.0);
  const auto az = build_A_3concave(z, beta_form(z, 2).value, z.window_after(4));
  REQUIRE(az.a.dim() == 1);
  CHECK(std::abs(az.a(0, 0)) <= 1e-15);

  const auto one = scalar(1.0);
  const auto a1 = build_A_3concave(one, beta_form(one, 2).value, one.window_after(4));
  CHECK(a1.a.dim() == 0);
  CHECK(a1.hprime_basis.cols() == 0);
}

TEST_CASE("build_A_general: m-isometric input gives A = 0") {
  const auto model = shift_model(WeightRule::dirichlet(), 2, 24, 96);
  CHECK(model.a.max_norm() <= 1e-13);
  CHECK(model.welldef_residual <= 1e-13);
  for (std::size_t n = 0; n < 8; ++n)
    CHECK(std::abs(model.q->q(n, n).real() - 1.0 / double(n + 1)) <= 1e-12);
}

TEST_CASE("build_A_general: geometric_concave(1/2) A is the diagonal quotient beta_2 / q") {
  const auto model = shift_model(WeightRule::geometric_concave(0.5), 2, 24, 96);
  const std::size_t w = model.window.valid_dim;
  REQUIRE(model.hprime_dim() == w);
  const auto a_h = in_h(model, model.a);
  double prod = 1.0;
  for (std::size_t n = 0; n < w; ++n) {
    if (n > 0) prod *= 1.0 + std::ldexp(1.0, -int(n));
    const double beta2 = -std::ldexp(1.0, -int(n) - 2) * (1.0 - std::ldexp(1.0, -int(n) - 1));
    const double expected = beta2 * prod / 0.5;
    CHECK(std::abs(a_h(n, n).real() - expected) <= 1e-12);
  }
  CHECK(off_diagonal_norm(a_h.leading(w)) <= 1e-12);
}

TEST_CASE("build_A_general detects ill-defined forms and positive A") {
  // beta_m nonzero on ker Q
  const auto q = HermitianMatrix::diagonal(std::vector<double>{1.0, 0.0});
  const auto bad = HermitianMatrix::diagonal(std::vector<double>{-0.5, -0.5});
  CHECK(code_of([&] { build_A_general(q, bad, ExactWindow{2}); }) == ErrorCode::ill_defined_form);
  // beta_m positive
  const auto pos = HermitianMatrix::diagonal(std::vector<double>{0.5, 0.0});
  CHECK(code_of([&] { build_A_general(q, pos, ExactWindow{2}); }) == ErrorCode::not_negative);
}

TEST_CASE("p and weights for A = 0 are all identity") {
  const auto pw = build_p_and_weights(HermitianMatrix(3), 3, 10);
  for (const auto& s : pw.weights.weights) CHECK(distance_to_identity(s.matrix()) <= 1e-15);
}

TEST_CASE("p and weights for scalar A = -1/4, m = 3") {
  const auto pw = build_p_and_weights(scalar_h(-0.25), 3, 6);
  const auto p = [&](long long n) { return poly_eval(pw.p_coeffs, n)(0, 0).real(); };
  CHECK(p(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p(2) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(p(3) == doctest::Approx(1.75).epsilon(1e-15));
  const double expected[] = {1.0, std::sqrt(5.0) / 2.0, std::sqrt(7.0 / 5.0)};
  for (int n = 0; n < 3; ++n)
    CHECK(std::abs(pw.weights.weights[n](0, 0).real() - expected[n]) <= 1e-12);
  CHECK(pw.ratio_bound_c == 3.0);
}

TEST_CASE("p and weights for m = 2 closed form") {
  for (double a : {0.1, 0.5, 2.0}) {
    const auto pw = build_p_and_weights(scalar_h(-a), 2, 12);
    for (int n = 1; n <= 12; ++n) {
      const double expected = std::sqrt((1.0 + n * a) / (1.0 + (n - 1) * a));
      CHECK(std::abs(pw.weights.weights[n - 1](0, 0).real() - expected) <= 1e-13);
    }
  }
}

TEST_CASE("p invariants on a random negative semidefinite A") {
  std::mt19937_64 rng(11);
  for (int m = 2; m <= 5; ++m) {
    const auto a = -testing::random_psd(4, 3, rng).scaled(0.3);
    const std::size_t horizon = 20;
    const auto pw = build_p_and_weights(a, m, horizon);
    CHECK(pw.p_coeffs.size() <= std::size_t(m));
    for (int k = 0; k <= m - 2; ++k)
      CHECK(distance_to_identity(poly_eval(pw.p_coeffs, k).matrix()) <= 1e-13);
    const auto b2 = HermitianMatrix::identity(4) - a;
    CHECK(max_abs_diff(poly_eval(pw.p_coeffs, m - 1).matrix(), b2.matrix()) <= 1e-12);
    for (std::size_t n = 0; n <= horizon; ++n) {
      const auto pn = poly_eval(pw.p_coeffs, (long long)n);
      CHECK(max_abs_diff(pw.weights.cumulative[n].matrix(), pn.matrix()) <=
            1e-10 * (1.0 + pn.max_norm()));
    }
    for (int n = 1; n <= m - 2; ++n)
      CHECK(distance_to_identity(pw.weights.weights[n - 1].matrix()) <= 1e-12);
    // m-th forward difference of p vanishes
    for (std::size_t n = 0; n + m <= horizon; ++n) {
      ComplexMatrix diff(4, 4);
      const double scale = 1.0 + pw.weights.cumulative[n + m].max_norm();
      for (int k = 0; k <= m; ++k) {
        double c = std::tgamma(m + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(m - k + 1.0));
        if ((m - k) % 2) c = -c;
        diff += Complex(c) * pw.weights.cumulative[n + k].matrix();
      }
      CHECK(diff.max_norm() <= 1e-11 * scale);
    }
    for (const auto& s : pw.weights.weights) CHECK(eigh(s).values.front() > 1e-10);
  }
}

TEST_CASE("corrupted A triggers not-invertible") {
  CHECK(code_of([] { build_p_and_weights(scalar_h(4.0), 2, 4); }) == ErrorCode::not_invertible);
}

TEST_CASE("scalar 3-concave dilation layout") {
  const auto model = build_three_concave_model(scalar(1.0 / std::sqrt(2.0)));
  CHECK(model.path == DilationPath::three_concave);
  CHECK(std::abs(model.b(0, 0).real() - std::sqrt(5.0) / 2.0) <= 1e-12);
  const auto d = build_dilation(model, 5);
  REQUIRE(d.total_dim() == 6);
  const double t = 1.0 / std::sqrt(2.0);
  const double col[] = {t, 0.5, 0, 0, 0, 0};
  for (int i = 0; i < 6; ++i) CHECK(std::abs(std::abs(d.w(i, 0)) - col[i]) <= 1e-14);
  const double sub[] = {1.0, std::sqrt(5.0) / 2.0, std::sqrt(7.0 / 5.0), std::sqrt(10.0 / 7.0)};
  for (int j = 0; j < 4; ++j) CHECK(std::abs(d.w(j + 2, j + 1).real() - sub[j]) <= 1e-12);
  // everything else is zero
  double stray = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      if (!(i == j + 1 || (i <= 1 && j == 0))) stray = std::max(stray, std::abs(d.w(i, j)));
  CHECK(stray == 0.0);
}

TEST_CASE("zero operator yields the unweighted shift over U = I") {
  const auto d = build_dilation(build_three_concave_model(scalar(0.0)), 5);
  CHECK(d.hprime_dim == 1);
  for (std::size_t j = 0; j + 1 < d.total_dim(); ++j)
    CHECK(std::abs(std::abs(d.w(j + 1, j)) - 1.0) <= 1e-14);
  CHECK(std::abs(d.w(0, 0)) == 0.0);
}

TEST_CASE("unitary and isometric inputs give the degenerate dilation W = T") {
  const double h = 1.0 / std::sqrt(2.0);
  const auto t = make_finite_operator(ComplexMatrix(2, 2, {h, h, h, -h}));
  const auto q = solve_q_fixed_point(t, beta_form(t, 1).value);
  const auto d = build_dilation(build_general_model(t, 2, q), 4);
  CHECK(d.hprime_dim == 0);
  CHECK(d.w == t.matrix);

  const auto s = make_shift_corner(WeightRule::constant(1.0), 12);
  const auto rule = WeightRule::constant(1.0);
  const auto qs = solve_q_shift_diagonal(rule, shift_beta_diagonal(rule, 1, 49), 48, 12);
  const auto ds = build_dilation(build_general_model(s, 2, qs), 4);
  CHECK(ds.hprime_dim == 0);
  CHECK(ds.w == s.matrix);
}

TEST_CASE("general model invariants on shift inputs") {
  for (const auto& rule : {WeightRule::dirichlet(), WeightRule::geometric_concave(0.5)}) {
    const auto model = shift_model(rule, 2, 24, 96);
    CHECK(eigh(model.a).values.back() <= 1e-12);
    const auto b2 = congruence(model.b.matrix(), HermitianMatrix::identity(model.b.dim()));
    CHECK(max_abs_diff(b2.matrix(),
                       (HermitianMatrix::identity(model.a.dim()) - model.a).matrix()) <= 1e-12);
    CHECK(eigh(model.b).values.front() >= 1.0 - 1e-12);
    CHECK(model.ratio_bound_c == 2.0);
    // U^* U = Q on the window
    const std::size_t w = model.window.valid_dim;
    const auto utu = adjoint_times(model.u, model.u);
    CHECK(max_abs_diff(utu.leading(w), model.q->q.leading(w).matrix()) <= 1e-12);
  }
}

TEST_CASE("Badea dilation examples") {
  const auto dir = WeightRule::dirichlet();
  const auto td = make_shift_corner(dir, 24);
  const auto qd = solve_q_shift_diagonal(dir, shift_beta_diagonal(dir, 1, 97), 96, 24);
  const auto bd = build_badea_2iso(td, qd, 4);
  CHECK(bd.hprime_dim == 0);
  CHECK(bd.w == td.matrix);

  const auto geo = WeightRule::geometric_concave(0.5);
  const auto tg = make_shift_corner(geo, 24);
  const auto qg = solve_q_shift_diagonal(geo, shift_beta_diagonal(geo, 1, 97), 96, 24);
  const auto bg = build_badea_2iso(tg, qg, 4);
  const auto u2 = adjoint_times(bg.model.u, bg.model.u);
  double prod = 1.0;
  for (std::size_t n = 0; n < 16; ++n) {
    if (n > 0) prod *= 1.0 + std::ldexp(1.0, -int(n));
    const double qn = 0.5 / prod;
    CHECK(std::abs(u2(n, n).real() - (qn - std::ldexp(1.0, -int(n) - 1))) <= 1e-12);
  }
  CHECK(std::abs(u2(0, 0)) <= 1e-12);
  for (const auto& s : bg.weights.weights) CHECK(distance_to_identity(s.matrix()) == 0.0);
}

TEST_CASE("diagonal fast path agrees with the dense construction") {
  const auto rule = WeightRule::geometric_concave(0.5);
  const auto model = shift_model(rule, 2, 24, 96);
  const std::size_t w = model.window.valid_dim;
  const auto fast = build_diagonal_fast_path(rule, 2, w, 96, 8);
  const auto a_h = in_h(model, model.a);
  const auto b_h = in_h(model, model.b);
  const auto pw = build_p_and_weights(model.a, 2, 8);
  for (std::size_t i = 0; i < w; ++i) {
    CHECK(fast.in_range[i]);
    CHECK(std::abs(a_h(i, i).real() - fast.a[i]) <= 1e-10);
    CHECK(std::abs(b_h(i, i).real() - fast.b[i]) <= 1e-10);
  }
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto s_h = in_h(model, pw.weights.weights[n - 1]);
    for (std::size_t i = 0; i < w; ++i) CHECK(std::abs(s_h(i, i).real() - fast.s[n - 1][i]) <= 1e-10);
  }
}

TEST_CASE("assemble_W validates the block count") {
  const auto model = build_three_concave_model(scalar(0.5));
  const auto pw = build_p_and_weights(model.a, 3, 8);
  CHECK(code_of([&] { assemble_W(model, pw.weights, 4); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([&] { assemble_W(model, make_shift_weights({}), 6); }) ==
        ErrorCode::dimension_mismatch);
}
