#include <cmath>
#include <vector>

#include "doctest.h"
#include "mdilate/errors.hpp"
#include "mdilate/operator_model.hpp"
#include "test_support.hpp"

using namespace mdilate;

namespace {

OperatorCorner scalar(double t) { return make_finite_operator(ComplexMatrix(1, 1, {Complex(t)})); }

}  // namespace

TEST_CASE("shift corners from weight rules") {
  const auto u = make_shift_corner(WeightRule::constant(1.0), 3);
  const ComplexMatrix expected(3, 3, {0, 0, 0, 1, 0, 0, 0, 1, 0});
  CHECK(u.matrix == expected);
  CHECK(u.exact);
  CHECK(u.lower_band == 1);
  CHECK(u.upper_band == 0);

  const auto d = make_shift_corner(WeightRule::dirichlet(), 3);
  CHECK(d.matrix(1, 0).real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(d.matrix(2, 1).real() == doctest::Approx(std::sqrt(1.5)).epsilon(1e-15));

  const auto g = make_shift_corner(WeightRule::geometric_concave(0.5), 3);
  CHECK(g.matrix(1, 0).real() == doctest::Approx(std::sqrt(1.5)).epsilon(1e-15));
  CHECK(g.matrix(2, 1).real() == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));

  const auto t = make_shift_corner(WeightRule::table({2.0, 3.0}, 0.5), 5);
  CHECK(t.matrix(1, 0).real() == 2.0);
  CHECK(t.matrix(2, 1).real() == 3.0);
  CHECK(t.matrix(4, 3).real() == 0.5);
}

TEST_CASE("invalid rules and sizes are rejected") {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::parse_error;
  };
  CHECK(code_of([] { make_shift_corner(WeightRule::geometric_concave(1.0), 4); }) ==
        ErrorCode::invalid_rule);
  CHECK(code_of([] { make_shift_corner(WeightRule::constant(-1.0), 4); }) ==
        ErrorCode::invalid_rule);
  CHECK(code_of([] { make_shift_corner(WeightRule::table({1.0, 0.0}, 1.0), 4); }) ==
        ErrorCode::invalid_rule);
  CHECK(code_of([] { make_shift_corner(WeightRule::dirichlet(), 1); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("beta_form examples") {
  const auto id = make_finite_operator(ComplexMatrix::identity(3));
  const auto b = beta_form(id, 2);
  CHECK(b.value.max_norm() == 0.0);
  CHECK(b.window.valid_dim == 3);

  const auto s = beta_form(scalar(1.0 / std::sqrt(2.0)), 3);
  CHECK(s.value(0, 0).real() == doctest::Approx(-0.125).epsilon(1e-14));

  const auto d = beta_form(make_shift_corner(WeightRule::dirichlet(), 6), 2);
  CHECK(d.window.valid_dim == 4);
  CHECK(d.value.leading(4).max_norm() < 1e-14);
}

TEST_CASE("beta_form reports window exhaustion") {
  const auto t = make_shift_corner(WeightRule::dirichlet(), 4);
  try {
    (void)beta_form(t, 4);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::window_exhausted);
  }
}

TEST_CASE("scalar corners give (t^2 - 1)^m") {
  for (double t : {0.0, 0.3, 1.0 / std::sqrt(2.0), 1.0, 1.5}) {
    for (int m = 1; m <= 5; ++m) {
      const double expected = std::pow(t * t - 1.0, m);
      const double got = beta_form(scalar(t), m).value(0, 0).real();
      CHECK(std::abs(got - expected) <= 1e-14 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("binomial sum agrees with the recurrence beta_m = T^* beta_{m-1} T - beta_{m-1}") {
  for (const auto& rule : {WeightRule::dirichlet(), WeightRule::geometric_concave(0.5),
                           WeightRule::table({1.2, 0.8, 1.5, 1.1}, 1.05)}) {
    const auto t = make_shift_corner(rule, 16);
    for (int m = 2; m <= 4; ++m) {
      const auto prev = beta_form(t, m - 1).value;
      const auto rec = congruence(t.matrix, prev) - prev;
      const auto direct = beta_form(t, m);
      const std::size_t w = direct.window.valid_dim;
      CHECK(max_abs_diff(rec.leading(w).matrix(), direct.value.leading(w).matrix()) <= 1e-11);
    }
  }
}

TEST_CASE("shift beta forms are diagonal and match the closed-form diagonal") {
  const auto rule = WeightRule::geometric_concave(0.5);
  const auto t = make_shift_corner(rule, 20);
  for (int m = 1; m <= 3; ++m) {
    const auto b = beta_form(t, m);
    const std::size_t w = b.window.valid_dim;
    CHECK(off_diagonal_norm(b.value.leading(w).matrix()) <= 1e-13);
    const auto diag = shift_beta_diagonal(rule, m, w);
    for (std::size_t n = 0; n < w; ++n) CHECK(std::abs(b.value(n, n).real() - diag[n]) < 1e-13);
  }
  // beta_2 diagonal of w_j^2 = 1 + 2^{-j}: -2^{-(n+2)} (1 - 2^{-(n+1)})
  const auto b2 = shift_beta_diagonal(rule, 2, 12);
  for (std::size_t n = 0; n < 12; ++n) {
    const double expected = -std::ldexp(1.0, -int(n) - 2) * (1.0 - std::ldexp(1.0, -int(n) - 1));
    CHECK(std::abs(b2[n] - expected) <= 1e-15);
  }
}

TEST_CASE("enlarging the corner keeps the exact window entries") {
  const auto rule = WeightRule::table({1.3, 1.1, 0.9, 1.4, 1.2}, 1.1);
  for (int m = 1; m <= 3; ++m) {
    const auto small = beta_form(make_shift_corner(rule, 12), m);
    const auto large = beta_form(make_shift_corner(rule, 24), m);
    const std::size_t w = small.window.valid_dim;
    CHECK(max_abs_diff(small.value.leading(w).matrix(), large.value.leading(w).matrix()) == 0.0);
  }
}

TEST_CASE("power_window examples") {
  const auto p0 = power_window(scalar(0.3), 0);
  CHECK(distance_to_identity(p0.value) == 0.0);

  const auto s = power_window(make_shift_corner(WeightRule::constant(1.0), 4), 2);
  CHECK(s.window.valid_dim == 2);
  CHECK(s.value(2, 0) == Complex(1.0));
  CHECK(s.value(3, 1) == Complex(1.0));
  CHECK(s.value(1, 0) == Complex(0.0));

  const auto d = power_window(make_shift_corner(WeightRule::dirichlet(), 5), 2);
  CHECK(d.value(2, 0).real() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("classify examples") {
  const auto u = classify(make_shift_corner(WeightRule::constant(1.0), 10), 2);
  CHECK(u.expansive.flag);
  CHECK(u.m_concave.flag);
  CHECK(u.m_isometric.flag);

  const auto g = classify(make_shift_corner(WeightRule::geometric_concave(0.5), 16), 2);
  CHECK(g.expansive.flag);
  CHECK(g.m_concave.flag);
  CHECK_FALSE(g.m_isometric.flag);
  CHECK(g.m_concave.residual > 0.0);  // -beta_2 strictly positive on the window

  const auto s = classify(scalar(1.0 / std::sqrt(2.0)), 3);
  CHECK_FALSE(s.expansive.flag);
  CHECK(s.m_concave.flag);
  CHECK(s.delta_psd.flag);
  CHECK(s.delta_psd.residual == doctest::Approx(0.25));
}

TEST_CASE("m-isometric implies m-concave on random tables") {
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.8, 1.4);
    std::vector<double> w;
    for (int j = 0; j < 8; ++j) w.push_back(u(rng));
    const auto c = classify(make_shift_corner(WeightRule::table(w, 1.0), 14), 2);
    if (c.m_isometric.flag) CHECK(c.m_concave.flag);
  }
}

TEST_CASE("finite expansive m-concave operators: unitary examples classify as isometric") {
  const double h = 1.0 / std::sqrt(2.0);
  const auto t = make_finite_operator(ComplexMatrix(2, 2, {h, h, h, -h}));
  const auto c = classify(t, 3);
  CHECK(c.expansive.flag);
  CHECK(c.m_concave.flag);
  CHECK(c.m_isometric.flag);
  CHECK(c.beta_m_window.valid_dim == 2);
}
