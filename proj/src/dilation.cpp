#include "mdilate/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdilate/errors.hpp"

namespace mdilate {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double max_eigenvalue(const HermitianMatrix& x) {
  if (x.dim() == 0) return 0.0;
  return eigh(x).values.back();
}

// Riesz representative of the form F on the closed range of G^{1/2}:
// A = V^* G^{+1/2} F G^{+1/2} V with V an orthonormal basis of that range.
BuiltA form_on_range(const HermitianMatrix& gram, const HermitianMatrix& form, std::size_t n,
                     const Tolerances& tol) {
  const auto pinv = pinv_sqrt(gram, tol);
  const auto root = sqrt_psd(gram, tol);
  const ComplexMatrix a_full = pinv.inv_sqrt.matrix() * form.matrix() * pinv.inv_sqrt.matrix();

  BuiltA out;
  out.welldef_residual =
      max_abs_diff(form.matrix(), root.matrix() * a_full * root.matrix());
  if (out.welldef_residual > tol.welldef * (1.0 + form.max_norm())) {
    std::ostringstream os;
    os << "form does not vanish on the kernel of the root (residual " << out.welldef_residual
       << ")";
    throw Error(ErrorCode::ill_defined_form, os.str());
  }
  const auto& v = pinv.range_basis;
  out.a = HermitianMatrix::from(adjoint_times(v, a_full * v), 1e-6);
  const auto neg = psd_check(-out.a, tol.psd);
  if (!neg.is_psd) {
    std::ostringstream os;
    os << "A has eigenvalue " << -neg.min_eig << " > 0";
    throw Error(ErrorCode::not_negative, os.str());
  }
  out.hprime_basis = ComplexMatrix(n, v.cols());
  out.hprime_basis.set_block(0, 0, v);
  out.root = root.matrix();
  return out;
}

// U = V^* G^{1/2}, extended by zero outside the window.
ComplexMatrix make_u(const BuiltA& built, std::size_t n) {
  const std::size_t w = built.root.rows();
  const ComplexMatrix v = built.hprime_basis.block(0, 0, w, built.hprime_basis.cols());
  const ComplexMatrix uw = adjoint_times(v, built.root);
  ComplexMatrix u(uw.rows(), n);
  u.set_block(0, 0, uw);
  return u;
}

std::vector<HermitianMatrix> p_coefficients(const HermitianMatrix& a, int m) {
  const auto ff = falling_factorial_coefficients(m - 1);
  const double scale = 1.0 / factorial(m - 1);
  const HermitianMatrix minus_a = -a;
  std::vector<HermitianMatrix> coeffs;
  for (std::size_t j = 0; j < ff.size(); ++j) {
    HermitianMatrix c = minus_a.scaled(static_cast<double>(ff[j]) * scale);
    if (j == 0) c = c + HermitianMatrix::identity(a.dim());
    coeffs.push_back(std::move(c));
  }
  return coeffs;
}

void finish_model(DilationModel& model, const BuiltA& built, const Tolerances& tol) {
  const std::size_t n = model.t.dim();
  model.a = built.a;
  model.hprime_basis = built.hprime_basis;
  model.welldef_residual = built.welldef_residual;
  model.u = make_u(built, n);
  model.b = sqrt_psd(HermitianMatrix::identity(model.a.dim()) - model.a, tol);
  model.p_coeffs = p_coefficients(model.a, model.m);
  model.ratio_bound_c = ratio_bound_c(model.m);
  const double bnorm = max_eigenvalue(model.b);
  model.rayleigh_bound = std::max(bnorm * bnorm, model.ratio_bound_c);
}

}  // namespace

std::string to_string(DilationPath path) {
  switch (path) {
    case DilationPath::general_m: return "general_m";
    case DilationPath::three_concave: return "three_concave";
    case DilationPath::badea_2iso: return "badea_2iso";
  }
  return "";
}

BuiltA build_A_general(const HermitianMatrix& q, const HermitianMatrix& beta_m,
                       ExactWindow window, const Tolerances& tol) {
  if (q.dim() != beta_m.dim() || window.valid_dim > q.dim())
    throw Error(ErrorCode::dimension_mismatch, "build_A_general dimensions");
  const auto qpsd = psd_check(q, tol.psd);
  if (!qpsd.is_psd) throw Error(ErrorCode::not_psd, "Q is not nonnegative");
  const std::size_t w = window.valid_dim;
  return form_on_range(q.leading(w), beta_m.leading(w), q.dim(), tol);
}

BuiltA build_A_3concave(const OperatorCorner& t, const HermitianMatrix& delta,
                        ExactWindow window, const Tolerances& tol) {
  const std::size_t n = t.dim();
  if (delta.dim() != n || window.valid_dim > n)
    throw Error(ErrorCode::dimension_mismatch, "build_A_3concave dimensions");
  const ExactWindow dwin = t.window_after(2);
  const auto dpsd = psd_check(delta.leading(dwin.valid_dim), tol.psd);
  if (!dpsd.is_psd) {
    std::ostringstream os;
    os << "Delta = beta_2(T) has eigenvalue " << dpsd.min_eig;
    throw Error(ErrorCode::precondition_failed, os.str());
  }
  const auto b3 = beta_form(t, 3);
  const auto conc = psd_check(-b3.value.leading(b3.window.valid_dim), tol.psd);
  if (!conc.is_psd) {
    std::ostringstream os;
    os << "beta_3(T) has eigenvalue " << -conc.min_eig << " > 0";
    throw Error(ErrorCode::precondition_failed, os.str());
  }
  const HermitianMatrix x = congruence(t.matrix, b3.value);
  const std::size_t w = window.valid_dim;
  return form_on_range(delta.leading(w), x.leading(w), n, tol);
}

std::vector<long long> falling_factorial_coefficients(int k) {
  std::vector<long long> c{1};
  for (int i = 0; i < k; ++i) {
    std::vector<long long> next(c.size() + 1, 0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j + 1] += c[j];
      next[j] -= static_cast<long long>(i) * c[j];
    }
    c = std::move(next);
  }
  return c;
}

double ratio_bound_c(int m) { return static_cast<double>(m); }

ShiftWeights make_shift_weights(std::vector<HermitianMatrix> weights) {
  if (weights.empty()) throw Error(ErrorCode::dimension_mismatch, "no weights");
  ShiftWeights sw;
  const std::size_t r = weights.front().dim();
  ComplexMatrix prod = ComplexMatrix::identity(r);
  sw.cumulative.push_back(HermitianMatrix::identity(r));
  for (const auto& s : weights) {
    prod = s.matrix() * prod;
    sw.cumulative.push_back(HermitianMatrix::from(adjoint_times(prod, prod), 1e-6));
  }
  sw.weights = std::move(weights);
  return sw;
}

PolynomialWeights build_p_and_weights(const HermitianMatrix& a, int m, std::size_t horizon,
                                      const Tolerances& tol) {
  if (m < 2) throw Error(ErrorCode::dimension_mismatch, "p needs m >= 2");
  if (horizon < 1) throw Error(ErrorCode::dimension_mismatch, "weight horizon must be >= 1");
  PolynomialWeights out;
  out.p_coeffs = p_coefficients(a, m);
  out.ratio_bound_c = ratio_bound_c(m);

  std::vector<HermitianMatrix> weights;
  HermitianMatrix prev = HermitianMatrix::identity(a.dim());
  for (std::size_t n = 1; n <= horizon; ++n) {
    HermitianMatrix cur = poly_eval_unchecked(out.p_coeffs, static_cast<long long>(n));
    const auto cur_check = psd_check(cur, tol.psd);
    if (a.dim() > 0 && cur_check.min_eig <= tol.inv) {
      std::ostringstream os;
      os << "p(" << n << ") has eigenvalue " << cur_check.min_eig;
      throw Error(ErrorCode::not_invertible, os.str());
    }
    const auto inv_root = pinv_sqrt(prev, tol);
    if (inv_root.rank != prev.dim())
      throw Error(ErrorCode::not_invertible, "p(n-1) is singular");
    HermitianMatrix s =
        HermitianMatrix::from(sqrt_psd(cur, tol).matrix() * inv_root.inv_sqrt.matrix(), 1e-8);
    weights.push_back(std::move(s));
    prev = std::move(cur);
  }
  out.weights = make_shift_weights(std::move(weights));
  return out;
}

DilationModel build_general_model(const OperatorCorner& t, int m, const QSolution& q,
                                  const Tolerances& tol) {
  if (m < 2) throw Error(ErrorCode::dimension_mismatch, "general path needs m >= 2");
  if (q.q.dim() != t.dim()) throw Error(ErrorCode::dimension_mismatch, "Q size");
  DilationModel model;
  model.m = m;
  model.path = DilationPath::general_m;
  model.t = t;
  const auto beta = beta_form(t, m);
  model.delta = beta_form(t, m - 1).value;
  model.q = q;
  model.window = beta.window;
  const auto built = build_A_general(q.q, beta.value, beta.window, tol);
  finish_model(model, built, tol);
  return model;
}

DilationModel build_three_concave_model(const OperatorCorner& t, const Tolerances& tol) {
  DilationModel model;
  model.m = 3;
  model.path = DilationPath::three_concave;
  model.t = t;
  model.delta = beta_form(t, 2).value;
  model.window = t.window_after(4);
  const auto built = build_A_3concave(t, model.delta, model.window, tol);
  finish_model(model, built, tol);
  return model;
}

AssembledDilation assemble_W(const DilationModel& model, const ShiftWeights& weights,
                             std::size_t n_blocks) {
  if (n_blocks < static_cast<std::size_t>(model.m) + 2) {
    std::ostringstream os;
    os << "n_blocks = " << n_blocks << " must be at least m + 2 = " << model.m + 2;
    throw Error(ErrorCode::dimension_mismatch, os.str());
  }
  const std::size_t n = model.t.dim(), r = model.hprime_dim();
  if (weights.weights.size() + 1 < n_blocks)
    throw Error(ErrorCode::dimension_mismatch, "not enough weights for n_blocks");
  if (model.u.rows() != r || model.u.cols() != n)
    throw Error(ErrorCode::dimension_mismatch, "U must map H to H'");
  for (std::size_t j = 0; j + 1 < n_blocks; ++j)
    if (weights.weights[j].dim() != r)
      throw Error(ErrorCode::dimension_mismatch, "weight size differs from dim H'");

  AssembledDilation out;
  out.h_dim = n;
  out.hprime_dim = r;
  out.n_blocks = n_blocks;
  out.model = model;
  out.weights = weights;
  out.w = ComplexMatrix(out.total_dim(), out.total_dim());
  out.w.set_block(0, 0, model.t.matrix);
  if (r > 0) {
    out.w.set_block(out.block_offset(1), 0, model.u);
    for (std::size_t j = 1; j < n_blocks; ++j)
      out.w.set_block(out.block_offset(j + 1), out.block_offset(j),
                      weights.weights[j - 1].matrix());
  }
  return out;
}

AssembledDilation build_dilation(const DilationModel& model, std::size_t n_blocks,
                                 const Tolerances& tol) {
  const auto pw = build_p_and_weights(model.a, model.m,
                                      n_blocks + static_cast<std::size_t>(model.m), tol);
  return assemble_W(model, pw.weights, n_blocks);
}

AssembledDilation build_badea_2iso(const OperatorCorner& t, const QSolution& q,
                                   std::size_t n_blocks, const Tolerances& tol) {
  if (q.q.dim() != t.dim()) throw Error(ErrorCode::dimension_mismatch, "Q size");
  DilationModel model;
  model.m = 2;
  model.path = DilationPath::badea_2iso;
  model.t = t;
  model.q = q;
  model.window = t.window_after(2);
  const HermitianMatrix beta1 = beta_form(t, 1).value;
  model.delta = beta1;
  const std::size_t w = model.window.valid_dim;
  HermitianMatrix gap = q.q.leading(w) - beta1.leading(w);
  // rounding-level Q - beta_1 (T 2-isometric) means U' = 0, not a noise range
  if (gap.max_norm() <= tol.rank * (1.0 + q.q.max_norm())) gap = HermitianMatrix(w);
  const auto pinv = pinv_sqrt(gap, tol);  // not_psd when Q - beta_1 fails to be nonnegative
  BuiltA built;
  built.root = sqrt_psd(gap, tol).matrix();
  built.hprime_basis = ComplexMatrix(t.dim(), pinv.rank);
  built.hprime_basis.set_block(0, 0, pinv.range_basis);
  built.a = HermitianMatrix(pinv.rank);
  finish_model(model, built, tol);

  std::vector<HermitianMatrix> ones(n_blocks + 2, HermitianMatrix::identity(pinv.rank));
  return assemble_W(model, make_shift_weights(std::move(ones)), n_blocks);
}

DiagonalShiftModel build_diagonal_fast_path(const WeightRule& rule, int m, std::size_t window,
                                            std::size_t horizon, std::size_t n_weights,
                                            const Tolerances& tol) {
  if (window > horizon + 1) throw Error(ErrorCode::dimension_mismatch, "window beyond horizon");
  DiagonalShiftModel out;
  const auto delta = shift_beta_diagonal(rule, m - 1, horizon + 1);
  const auto qsol = solve_q_shift_diagonal(rule, delta, horizon, window, std::nullopt, tol);
  out.q = *qsol.q_seq;

  const auto beta = shift_beta_diagonal(rule, m, window);
  double qmax = 0.0;
  for (std::size_t i = 0; i < window; ++i) qmax = std::max(qmax, out.q[i]);
  const auto ff = falling_factorial_coefficients(m - 1);
  const double fact = factorial(m - 1);
  auto falling = [&](double z) {
    double s = 0.0, p = 1.0;
    for (long long c : ff) {
      s += static_cast<double>(c) * p;
      p *= z;
    }
    return s / fact;
  };

  out.in_range.assign(window, false);
  out.a.assign(window, 0.0);
  out.b.assign(window, 1.0);
  out.s.assign(n_weights, std::vector<double>(window, 1.0));
  for (std::size_t i = 0; i < window; ++i) {
    if (!(qmax > 0.0 && out.q[i] > tol.rank * qmax)) continue;
    const double a = beta[i] / out.q[i];
    out.in_range[i] = true;
    out.a[i] = a;
    out.b[i] = std::sqrt(1.0 - a);
    for (std::size_t n = 1; n <= n_weights; ++n) {
      const double pn = 1.0 - a * falling(static_cast<double>(n));
      const double pp = 1.0 - a * falling(static_cast<double>(n - 1));
      out.s[n - 1][i] = std::sqrt(pn / pp);
    }
  }
  return out;
}

}  // namespace mdilate
