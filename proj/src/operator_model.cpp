#include "mdilate/operator_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdilate/errors.hpp"

namespace mdilate {

WeightRule WeightRule::constant(double c) {
  WeightRule w;
  w.kind = Kind::constant;
  w.c = c;
  return w;
}

WeightRule WeightRule::dirichlet() {
  WeightRule w;
  w.kind = Kind::dirichlet;
  return w;
}

WeightRule WeightRule::geometric_concave(double r) {
  WeightRule w;
  w.kind = Kind::geometric_concave;
  w.r = r;
  return w;
}

WeightRule WeightRule::table(std::vector<double> values, double tail) {
  WeightRule w;
  w.kind = Kind::table;
  w.values = std::move(values);
  w.tail = tail;
  return w;
}

void WeightRule::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  switch (kind) {
    case Kind::constant:
      if (!positive(c)) throw Error(ErrorCode::invalid_rule, "constant weight must be positive");
      break;
    case Kind::dirichlet:
      break;
    case Kind::geometric_concave:
      if (!(r > 0.0 && r < 1.0))
        throw Error(ErrorCode::invalid_rule, "geometric_concave requires 0 < r < 1");
      break;
    case Kind::table:
      if (!positive(tail)) throw Error(ErrorCode::invalid_rule, "table tail must be positive");
      for (double v : values)
        if (!positive(v)) throw Error(ErrorCode::invalid_rule, "table weights must be positive");
      break;
  }
}

double WeightRule::weight_sq(std::size_t j) const {
  switch (kind) {
    case Kind::constant:
      return c * c;
    case Kind::dirichlet:
      return static_cast<double>(j + 1) / static_cast<double>(j);
    case Kind::geometric_concave:
      return 1.0 + std::pow(r, static_cast<double>(j));
    case Kind::table: {
      const double w = j <= values.size() ? values[j - 1] : tail;
      return w * w;
    }
  }
  return 0.0;
}

double WeightRule::weight(std::size_t j) const {
  switch (kind) {
    case Kind::constant:
      return c;
    case Kind::table:
      return j <= values.size() ? values[j - 1] : tail;
    default:
      return std::sqrt(weight_sq(j));
  }
}

std::string WeightRule::name() const {
  switch (kind) {
    case Kind::constant: return "constant";
    case Kind::dirichlet: return "dirichlet";
    case Kind::geometric_concave: return "geometric_concave";
    case Kind::table: return "table";
  }
  return "";
}

ExactWindow OperatorCorner::window_after(std::size_t ops) const {
  const std::size_t n = dim();
  if (!exact) return {n};
  const std::size_t lost = ops * bandwidth();
  if (lost >= n) {
    std::ostringstream os;
    os << ops << " products of bandwidth " << bandwidth() << " exhaust a corner of size " << n;
    throw Error(ErrorCode::window_exhausted, os.str());
  }
  return {n - lost};
}

OperatorCorner make_shift_corner(const WeightRule& rule, std::size_t n) {
  if (n < 2) throw Error(ErrorCode::dimension_mismatch, "shift corner needs N >= 2");
  rule.validate();
  OperatorCorner t;
  t.matrix = ComplexMatrix(n, n);
  for (std::size_t j = 1; j < n; ++j) t.matrix(j, j - 1) = rule.weight(j);
  t.lower_band = 1;
  t.upper_band = 0;
  t.exact = true;
  t.rule = rule;
  return t;
}

OperatorCorner make_finite_operator(ComplexMatrix matrix) {
  if (!matrix.is_square()) throw Error(ErrorCode::dimension_mismatch, "operator must be square");
  if (!matrix.all_finite()) throw Error(ErrorCode::non_finite, "operator entries must be finite");
  OperatorCorner t;
  for (std::size_t i = 0; i < matrix.rows(); ++i)
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      if (matrix(i, j) == Complex{}) continue;
      if (i > j) t.lower_band = std::max(t.lower_band, i - j);
      if (j > i) t.upper_band = std::max(t.upper_band, j - i);
    }
  t.matrix = std::move(matrix);
  t.exact = false;
  return t;
}

double binomial(int m, int k) {
  if (k < 0 || k > m) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (m - k + i) / i;
  return std::round(b);
}

BetaForm beta_form(const OperatorCorner& t, int m) {
  if (m < 1) throw Error(ErrorCode::dimension_mismatch, "beta_form requires m >= 1");
  const ExactWindow window = t.window_after(static_cast<std::size_t>(m));
  const std::size_t n = t.dim();
  ComplexMatrix acc(n, n);
  ComplexMatrix power = ComplexMatrix::identity(n);
  for (int k = 0; k <= m; ++k) {
    if (k > 0) power = t.matrix * power;
    const double sign = ((m - k) % 2 == 0) ? 1.0 : -1.0;
    acc += (sign * binomial(m, k)) * adjoint_times(power, power);
  }
  return {HermitianMatrix::from(acc), window};
}

PowerWindow power_window(const OperatorCorner& t, std::size_t n) {
  const ExactWindow window = n == 0 ? ExactWindow{t.dim()} : t.window_after(n);
  ComplexMatrix p = ComplexMatrix::identity(t.dim());
  for (std::size_t k = 0; k < n; ++k) p = t.matrix * p;
  return {std::move(p), window};
}

Classification classify(const OperatorCorner& t, int m, const Tolerances& tol) {
  if (m < 2) throw Error(ErrorCode::dimension_mismatch, "classify requires m >= 2");
  Classification c;
  c.m = m;

  const auto b1 = beta_form(t, 1);
  const auto bm = beta_form(t, m);
  const auto delta = beta_form(t, m - 1);
  c.beta_m_window = bm.window;
  c.delta_window = delta.window;

  const auto b1w = b1.value.leading(b1.window.valid_dim);
  const auto bmw = bm.value.leading(bm.window.valid_dim);
  const auto dw = delta.value.leading(delta.window.valid_dim);

  const auto exp = psd_check(b1w, tol.psd);
  c.expansive = {exp.is_psd, exp.min_eig};
  const auto conc = psd_check(-bmw, tol.psd);
  c.m_concave = {conc.is_psd, conc.min_eig};
  const double iso = bmw.max_norm();
  c.m_isometric = {iso <= tol.psd, iso};
  const auto dpsd = psd_check(dw, tol.psd);
  c.delta_psd = {dpsd.is_psd, dpsd.min_eig};
  return c;
}

std::vector<double> shift_weight_products(const WeightRule& rule, std::size_t count) {
  rule.validate();
  std::vector<double> prod(count);
  double p = 1.0;
  for (std::size_t n = 0; n < count; ++n) {
    if (n > 0) p *= rule.weight_sq(n);
    prod[n] = p;
  }
  return prod;
}

std::vector<double> shift_beta_diagonal(const WeightRule& rule, int m, std::size_t count) {
  rule.validate();
  std::vector<double> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    double s = 0.0;
    double partial = 1.0;  // prod_{j=n+1}^{n+k} w_j^2
    for (int k = 0; k <= m; ++k) {
      if (k > 0) partial *= rule.weight_sq(n + static_cast<std::size_t>(k));
      const double sign = ((m - k) % 2 == 0) ? 1.0 : -1.0;
      s += sign * binomial(m, k) * partial;
    }
    out[n] = s;
  }
  return out;
}

}  // namespace mdilate
