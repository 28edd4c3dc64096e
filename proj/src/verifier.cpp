#include "mdilate/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mdilate/errors.hpp"

namespace mdilate {

namespace {

class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  Complex next() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re, im};
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::string describe(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [k, v] : items) {
    if (!first) os << ", ";
    os << k << '=' << v;
    first = false;
  }
  return os.str();
}

ComplexVector matvec(const ComplexMatrix& a, std::span<const Complex> x) { return a * x; }

ComplexVector segment(std::span<const Complex> x, std::size_t offset, std::size_t len) {
  return ComplexVector(x.begin() + static_cast<std::ptrdiff_t>(offset),
                       x.begin() + static_cast<std::ptrdiff_t>(offset + len));
}

double diff_norm(std::span<const Complex> a, std::span<const Complex> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

// x supported on H coordinates below `support` and on blocks 1..last_block.
ComplexVector windowed_vector(const AssembledDilation& d, std::size_t support,
                              std::size_t last_block, GaussianSource& rng) {
  ComplexVector x(d.total_dim());
  for (std::size_t i = 0; i < support; ++i) x[i] = rng.next();
  for (std::size_t k = 1; k <= last_block && k <= d.n_blocks; ++k)
    for (std::size_t i = 0; i < d.hprime_dim; ++i) x[d.block_offset(k) + i] = rng.next();
  return x;
}

// S_{hi}...S_{lo} v (applied right to left), with 1-based weight indices.
ComplexVector apply_weights(const ShiftWeights& w, std::size_t lo, std::size_t hi,
                            ComplexVector v) {
  for (std::size_t j = lo; j <= hi; ++j) v = matvec(w.weights[j - 1].matrix(), v);
  return v;
}

}  // namespace

CheckResult make_check(std::string name, double residual, double tolerance, std::string window) {
  CheckResult c;
  c.name = std::move(name);
  c.residual = residual;
  c.tolerance = tolerance;
  c.passed = std::isfinite(residual) && residual <= tolerance;
  c.window = std::move(window);
  return c;
}

void VerificationReport::add(CheckResult check) {
  overall = overall && check.passed;
  checks.push_back(std::move(check));
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ComplexVector apply_w(const AssembledDilation& d, std::span<const Complex> x) {
  if (x.size() != d.total_dim()) throw Error(ErrorCode::dimension_mismatch, "apply_w size");
  const std::size_t n = d.h_dim, r = d.hprime_dim;
  const ComplexMatrix& w = d.w;
  ComplexVector y(d.total_dim());
  auto accumulate = [&](std::size_t row0, std::size_t rows, std::size_t col0, std::size_t cols) {
    for (std::size_t i = row0; i < row0 + rows; ++i) {
      const auto row = w.row(i);
      Complex s{};
      for (std::size_t j = col0; j < col0 + cols; ++j) s += row[j] * x[j];
      y[i] += s;
    }
  };
  accumulate(0, n, 0, n);
  if (r == 0) return y;
  accumulate(d.block_offset(1), r, 0, n);
  for (std::size_t k = 1; k < d.n_blocks; ++k)
    accumulate(d.block_offset(k + 1), r, d.block_offset(k), r);
  return y;
}

std::size_t test_support(const AssembledDilation& d, int m) {
  const auto& t = d.model.t;
  const std::size_t w = d.model.window.valid_dim;
  if (!t.exact) return w;
  const std::size_t lost = static_cast<std::size_t>(m) * t.bandwidth();
  if (lost >= w) {
    std::ostringstream os;
    os << "window " << w << " cannot host " << m << " further products";
    throw Error(ErrorCode::window_exhausted, os.str());
  }
  return w - lost;
}

CheckResult check_dilation_property(const AssembledDilation& d, std::size_t n_max,
                                    const Tolerances& tol) {
  const auto& t = d.model.t;
  const std::size_t n = d.h_dim;
  n_max = std::min(n_max, d.n_blocks);
  std::vector<ComplexVector> cols(n, ComplexVector(d.total_dim()));
  for (std::size_t j = 0; j < n; ++j) cols[j][j] = 1.0;
  ComplexMatrix tn = ComplexMatrix::identity(n);
  double residual = 0.0;
  std::size_t checked = 0, last_window = n;
  for (std::size_t p = 1; p <= n_max; ++p) {
    for (auto& c : cols) c = apply_w(d, c);
    tn = t.matrix * tn;
    std::size_t vd = n;
    if (t.exact) {
      if (p * t.bandwidth() >= n) break;
      vd = n - p * t.bandwidth();
    }
    for (std::size_t j = 0; j < vd; ++j)
      for (std::size_t i = 0; i < vd; ++i)
        residual = std::max(residual, std::abs(cols[j][i] - tn(i, j)));
    checked = p;
    last_window = vd;
  }
  return make_check("dilation_property", residual, tol.dilation,
                    describe({{"n_max", double(checked)}, {"final_window", double(last_window)}}));
}

CheckResult check_powers_formula(const AssembledDilation& d, int m, const TrialOptions& opts,
                                 const Tolerances& tol) {
  const std::size_t support = test_support(d, m);
  const std::size_t mm = static_cast<std::size_t>(m);
  const std::size_t last_block = d.n_blocks >= mm ? d.n_blocks - mm : 0;
  const auto& t = d.model.t.matrix;
  const auto& u = d.model.u;
  const std::size_t n = d.h_dim, r = d.hprime_dim;
  GaussianSource rng(opts.seed);
  double residual = 0.0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    const ComplexVector x = windowed_vector(d, support, last_block, rng);
    ComplexVector y = x;
    for (int k = 0; k < m; ++k) y = apply_w(d, y);

    ComplexVector f(d.total_dim());
    std::vector<ComplexVector> tpow{segment(x, 0, n)};  // T^j h_0
    for (std::size_t j = 1; j <= mm; ++j) tpow.push_back(matvec(t, tpow.back()));
    std::copy(tpow[mm].begin(), tpow[mm].end(), f.begin());
    if (r > 0) {
      for (std::size_t k = 1; k <= std::min(mm, d.n_blocks); ++k) {
        ComplexVector v = apply_weights(d.weights, 1, k - 1, matvec(u, tpow[mm - k]));
        std::copy(v.begin(), v.end(), f.begin() + static_cast<std::ptrdiff_t>(d.block_offset(k)));
      }
      for (std::size_t k = mm + 1; k <= d.n_blocks; ++k) {
        ComplexVector v = apply_weights(d.weights, k - mm, k - 1,
                                        segment(x, d.block_offset(k - mm), r));
        std::copy(v.begin(), v.end(), f.begin() + static_cast<std::ptrdiff_t>(d.block_offset(k)));
      }
    }
    residual = std::max(residual, diff_norm(y, f) / std::max(norm(x), 1e-300));
  }
  return make_check("powers_formula", residual, tol.powers,
                    describe({{"m", double(m)},
                              {"h_support", double(support)},
                              {"blocks", double(last_block)},
                              {"trials", double(opts.trials)}}));
}

CheckResult check_w_m_isometry(const AssembledDilation& d, int m, const TrialOptions& opts,
                               const Tolerances& tol) {
  const std::size_t support = test_support(d, m);
  const std::size_t mm = static_cast<std::size_t>(m);
  const std::size_t last_block = d.n_blocks >= mm ? d.n_blocks - mm : 0;
  GaussianSource rng(opts.seed ^ 0x5a5a5a5aULL);
  double residual = 0.0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    ComplexVector x = windowed_vector(d, support, last_block, rng);
    const double x2 = norm_squared(x);
    double s = 0.0;
    for (int k = 0; k <= m; ++k) {
      if (k > 0) x = apply_w(d, x);
      const double sign = ((m - k) % 2 == 0) ? 1.0 : -1.0;
      s += sign * binomial(m, k) * norm_squared(x);
    }
    residual = std::max(residual, std::abs(s) / x2);
  }
  return make_check("w_m_isometry", residual, tol.isometry,
                    describe({{"m", double(m)},
                              {"h_support", double(support)},
                              {"blocks", double(last_block)},
                              {"trials", double(opts.trials)}}));
}

CheckResult check_criterion_identity(const AssembledDilation& d, const TrialOptions& opts,
                                     const Tolerances& tol) {
  const int m = d.model.m;
  const std::size_t mm = static_cast<std::size_t>(m);
  const std::size_t support = test_support(d, m);
  const auto& t = d.model.t.matrix;
  const std::size_t n = d.h_dim;
  const auto beta = beta_form(d.model.t, m).value;
  GaussianSource rng(opts.seed ^ 0xc3c3c3c3ULL);
  double residual = 0.0;
  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    ComplexVector h(n);
    for (std::size_t i = 0; i < support; ++i) h[i] = rng.next();
    double total = inner(matvec(beta.matrix(), h), h).real();
    std::vector<ComplexVector> tpow{h};
    for (std::size_t j = 1; j < mm; ++j) tpow.push_back(matvec(t, tpow.back()));
    if (d.hprime_dim > 0) {
      for (int l = 1; l <= m; ++l) {
        const double sign = ((m - l) % 2 == 0) ? 1.0 : -1.0;
        double inner_sum = 0.0;
        for (int k = 1; k <= l; ++k) {
          const auto v = apply_weights(d.weights, 1, static_cast<std::size_t>(k - 1),
                                       matvec(d.model.u, tpow[static_cast<std::size_t>(l - k)]));
          inner_sum += norm_squared(v);
        }
        total += sign * binomial(m, l) * inner_sum;
      }
    }
    residual = std::max(residual, std::abs(total) / norm_squared(h));
  }
  return make_check("criterion_identity", residual, tol.criterion,
                    describe({{"m", double(m)},
                              {"h_support", double(support)},
                              {"trials", double(opts.trials)}}));
}

CheckResult check_weight_shift_difference(const AssembledDilation& d, const Tolerances& tol) {
  const int m = d.model.m;
  const std::size_t mm = static_cast<std::size_t>(m);
  const auto& cum = d.weights.cumulative;
  // weights S_1..S_{n_blocks-1} live in W, hence cumulative[0..n_blocks-1]
  const std::size_t available = std::min(cum.size(), d.n_blocks);
  double residual = 0.0;
  std::size_t worst = 0, checked = 0;
  if (d.hprime_dim > 0) {
    for (std::size_t n0 = 0; n0 + mm < available; ++n0) {
      ComplexMatrix acc(d.hprime_dim, d.hprime_dim);
      for (std::size_t k = 0; k <= mm; ++k) {
        const double sign = ((mm - k) % 2 == 0) ? 1.0 : -1.0;
        acc += Complex(sign * binomial(m, static_cast<int>(k))) * cum[n0 + k].matrix();
      }
      const double r = acc.max_norm();
      if (r > residual) {
        residual = r;
        worst = n0;
      }
      ++checked;
    }
  }
  std::ostringstream os;
  os << "m=" << m << ", offsets=" << checked;
  if (residual > tol.difference) os << ", first_failure_n=" << worst;
  return make_check("weight_shift_difference", residual, tol.difference, os.str());
}

CheckResult check_minimality(const AssembledDilation& d, const Tolerances& tol) {
  const std::size_t total = d.total_dim();
  if (d.hprime_dim == 0)
    return make_check("minimality", 0.0, 0.0, "dim H'=0, vacuous");
  const std::size_t n = d.h_dim, steps = d.n_blocks + 1;
  ComplexMatrix cols(total, n * steps);
  for (std::size_t j = 0; j < n; ++j) {
    ComplexVector v(total);
    v[j] = 1.0;
    for (std::size_t p = 0; p < steps; ++p) {
      if (p > 0) v = apply_w(d, v);
      for (std::size_t i = 0; i < total; ++i) cols(i, p * n + j) = v[i];
    }
  }
  const std::size_t rank = numerical_rank(cols, tol.minimality_rank);
  return make_check("minimality", static_cast<double>(total - rank), 0.0,
                    describe({{"total_dim", double(total)},
                              {"rank", double(rank)},
                              {"powers", double(d.n_blocks)}}));
}

CheckResult remark_consistency(const AssembledDilation& d, const Tolerances& tol) {
  if (d.hprime_dim == 0) return make_check("remark_consistency", 0.0, 0.0, "dim H'=0, vacuous");
  const int m = d.model.m;
  const auto& s = d.weights.weights[static_cast<std::size_t>(m - 2)];
  const double s_dev = distance_to_identity(s.matrix());
  const auto beta = beta_form(d.model.t, m);
  const double beta_norm = beta.value.leading(beta.window.valid_dim).max_norm();
  const bool s_iso = s_dev <= tol.remark, t_iso = beta_norm <= tol.remark;
  return make_check("remark_consistency", s_iso == t_iso ? 0.0 : 1.0, 0.0,
                    describe({{"S_m-1_minus_I", s_dev}, {"beta_m_window", beta_norm}}));
}

CheckResult check_u_stein(const AssembledDilation& d, const Tolerances& tol) {
  const auto& t = d.model.t;
  const std::size_t w = d.model.window.valid_dim;
  const std::size_t shrink = t.exact ? t.bandwidth() : 0;
  const std::size_t inner_w = w > shrink ? w - shrink : 0;
  const ComplexMatrix uu = adjoint_times(d.model.u, d.model.u);
  const ComplexMatrix lhs = adjoint_times(t.matrix, uu * t.matrix);
  const double residual = inner_w == 0 ? 0.0 : max_abs_diff(lhs.leading(inner_w), uu.leading(inner_w));
  return make_check("u_stein", residual, tol.stein * (1.0 + uu.max_norm()),
                    describe({{"window", double(inner_w)}}));
}

CheckResult check_model_invariants(const AssembledDilation& d, const Tolerances& tol) {
  const auto& model = d.model;
  const std::size_t r = model.hprime_dim();
  if (r == 0) return make_check("model_invariants", 0.0, tol.sqrt, "dim H'=0, vacuous");
  const int m = model.m;
  const auto id = ComplexMatrix::identity(r);
  double residual = std::max(0.0, eigh(model.a).values.back());
  const ComplexMatrix b2 = model.b.matrix() * model.b.matrix();
  residual = std::max(residual, max_abs_diff(b2, id - model.a.matrix()));
  for (int k = 0; k <= m - 2; ++k)
    residual = std::max(residual, distance_to_identity(poly_eval(model.p_coeffs, k, tol).matrix()));
  residual = std::max(residual, max_abs_diff(poly_eval(model.p_coeffs, m - 1, tol).matrix(), b2));
  residual = std::max(residual,
                      max_abs_diff(d.weights.weights[static_cast<std::size_t>(m - 2)].matrix(),
                                   model.b.matrix()));
  double scale = 1.0;
  for (std::size_t n = 0; n < d.weights.cumulative.size(); ++n) {
    const auto p = poly_eval_unchecked(model.p_coeffs, static_cast<long long>(n));
    scale = std::max(scale, p.max_norm());
    residual = std::max(residual, max_abs_diff(d.weights.cumulative[n].matrix(), p.matrix()));
  }
  return make_check("model_invariants", residual, tol.sqrt * (1.0 + scale),
                    describe({{"dim_Hprime", double(r)},
                              {"cumulative_terms", double(d.weights.cumulative.size())}}));
}

std::vector<CheckResult> check_q_contract(const DilationModel& model, const Tolerances& tol) {
  std::vector<CheckResult> out;
  if (!model.q) return out;
  const auto& q = model.q->q;
  const auto res = verify_q(model.t, q, model.delta, model.window);
  const double scale = 1.0 + q.max_norm();
  const std::string win = describe({{"window", double(model.window.valid_dim)}});
  out.push_back(make_check("q_stein", res.stein_residual, tol.stein * scale, win));
  out.push_back(
      make_check("q_dominance", std::max(0.0, -res.dominance_residual), tol.psd * scale, win));
  return out;
}

CheckResult check_oracle_equivalence(const DilationModel& model, const WeightRule& rule,
                                     std::size_t horizon, std::size_t count,
                                     const Tolerances& tol) {
  if (model.path != DilationPath::general_m || !model.q || !model.q->q_seq)
    throw Error(ErrorCode::precondition_failed, "oracle equivalence needs a diagonal general_m model");
  const int m = model.m;
  const std::size_t w = model.window.valid_dim, r = model.hprime_dim();
  const auto fast = build_diagonal_fast_path(rule, m, w, horizon, count, tol);
  const ComplexMatrix v = model.hprime_basis.block(0, 0, w, r);
  auto project = [&](const std::vector<double>& diag) {
    return adjoint_times(v, ComplexMatrix::diagonal(std::span<const double>(diag)) * v);
  };

  double err_a = max_abs_diff(model.a.matrix(), project(fast.a));
  double err_b = max_abs_diff(model.b.matrix(), project(fast.b));
  double err_s = 0.0;
  if (r > 0) {
    const auto dense = build_p_and_weights(model.a, m, count, tol);
    for (std::size_t n = 0; n < count; ++n)
      err_s = std::max(err_s, max_abs_diff(dense.weights.weights[n].matrix(), project(fast.s[n])));
  }

  // q from a dense corner large enough that Delta is exact up to the horizon
  const auto corner = make_shift_corner(rule, horizon + static_cast<std::size_t>(m) + 1);
  const auto delta = beta_form(corner, m - 1).value;
  const auto dense_q = solve_q_shift_dense(corner, delta, horizon, model.t.dim(), tol);
  double err_q = 0.0;
  const auto& model_q = *model.q->q_seq;
  for (std::size_t n = 0; n <= count && n < model_q.size(); ++n) {
    err_q = std::max(err_q, std::abs((*dense_q.q_seq)[n] - model_q[n]));
    err_q = std::max(err_q, std::abs(fast.q[n] - model_q[n]));
  }
  const double residual = std::max({err_a, err_b, err_s, err_q});
  return make_check("oracle_equivalence", residual, tol.oracle,
                    describe({{"A", err_a}, {"B", err_b}, {"S", err_s}, {"q", err_q},
                              {"count", double(count)}}));
}

Certificate nonisomorphism_certificate(const AssembledDilation& general,
                                       const AssembledDilation& badea, const Tolerances& tol) {
  if (general.h_dim != badea.h_dim)
    throw Error(ErrorCode::dimension_mismatch, "dilations of different operators");
  const auto& t = general.model.t;
  std::size_t support = std::min(general.model.window.valid_dim, badea.model.window.valid_dim);
  if (t.exact) support = std::min(support, general.h_dim - t.bandwidth());

  auto gram = [&](const AssembledDilation& d) {
    const ComplexMatrix c = d.w.block(0, 0, d.total_dim(), support);
    return adjoint_times(c, c);
  };
  const auto gap = HermitianMatrix::from(gram(general) - gram(badea), 1e-8);
  Certificate cert;
  cert.tolerance = tol.cert;
  cert.support = support;
  if (support == 0) return cert;
  const auto e = eigh(gap);
  std::size_t pick = std::abs(e.values.front()) >= std::abs(e.values.back()) ? 0 : support - 1;
  cert.gap = std::abs(e.values[pick]);
  cert.witness = e.basis.column(pick);
  cert.gap_e0 = std::abs(gap(0, 0).real());
  cert.found = cert.gap > tol.cert;
  const auto beta1 = beta_form(t, 1).value.leading(support);
  cert.identity_residual = max_abs_diff(gap.matrix(), beta1.matrix());
  return cert;
}

VerificationReport verify_dilation(const AssembledDilation& d, const TrialOptions& opts,
                                   const Tolerances& tol) {
  VerificationReport report;
  const int m = d.model.m;
  report.add(check_dilation_property(d, d.n_blocks, tol));
  report.add(check_powers_formula(d, m, opts, tol));
  report.add(check_w_m_isometry(d, m, opts, tol));
  report.add(check_criterion_identity(d, opts, tol));
  report.add(check_weight_shift_difference(d, tol));
  report.add(check_minimality(d, tol));
  report.add(check_model_invariants(d, tol));
  for (auto& c : check_q_contract(d.model, tol)) report.add(std::move(c));
  if (d.model.path == DilationPath::general_m) {
    report.add(check_u_stein(d, tol));
    report.add(remark_consistency(d, tol));
  }
  return report;
}

AssembledDilation perturb_weight(const AssembledDilation& d, std::size_t n, double delta) {
  if (n == 0 || n >= d.n_blocks || n > d.weights.weights.size())
    throw Error(ErrorCode::dimension_mismatch, "no such weight in W");
  AssembledDilation out = d;
  std::vector<HermitianMatrix> weights = d.weights.weights;
  weights[n - 1] = weights[n - 1] + HermitianMatrix::identity(d.hprime_dim).scaled(delta);
  out.weights = make_shift_weights(std::move(weights));
  out.w.set_block(out.block_offset(n + 1), out.block_offset(n), out.weights.weights[n - 1].matrix());
  return out;
}

AssembledDilation zero_u(const AssembledDilation& d) {
  AssembledDilation out = d;
  out.model.u = ComplexMatrix(d.hprime_dim, d.h_dim);
  if (d.hprime_dim > 0) out.w.set_block(out.block_offset(1), 0, out.model.u);
  return out;
}

}  // namespace mdilate
