#include "mdilate/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace mdilate {

namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

std::string describe_classification(const Classification& c) {
  std::ostringstream os;
  os.precision(6);
  auto flag = [&](const char* name, const FlagResidual& f) {
    os << name << '=' << (f.flag ? "yes" : "no") << " (" << f.residual << ")";
  };
  flag("expansive", c.expansive);
  os << ", ";
  flag("m_concave", c.m_concave);
  os << ", ";
  flag("delta_psd", c.delta_psd);
  return os.str();
}

void require_path_preconditions(DilationPath path, const Classification& c, int m) {
  bool ok = false;
  switch (path) {
    case DilationPath::general_m: ok = c.expansive.flag && c.m_concave.flag; break;
    case DilationPath::three_concave: ok = m == 3 && c.m_concave.flag && c.delta_psd.flag; break;
    case DilationPath::badea_2iso: ok = m == 2 && c.expansive.flag && c.m_concave.flag; break;
  }
  if (!ok)
    throw Error(ErrorCode::precondition_failed,
                "path " + to_string(path) + " does not apply for m=" + std::to_string(m) + ": " +
                    describe_classification(c));
}

QSolution solve_q(const OperatorSpecFile& spec, const OperatorCorner& t, const Tolerances& tol) {
  const int m = spec.m;
  if (spec.op.kind == OperatorSpec::Kind::shift) {
    const std::size_t horizon = spec.truncation.effective_horizon();
    const auto delta = shift_beta_diagonal(*spec.op.rule, m - 1, horizon + 1);
    return solve_q_shift_diagonal(*spec.op.rule, delta, horizon, t.dim(), spec.q0, tol);
  }
  return solve_q_fixed_point(t, beta_form(t, m - 1).value, tol);
}

double spectral_radius(const HermitianMatrix& x) {
  if (x.dim() == 0) return 0.0;
  const auto e = eigh(x);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

void add_certificate_checks(PipelineResult& result, const Certificate& cert) {
  const auto& t = result.dilation->model.t;
  const auto beta1 = beta_form(t, 1).value.leading(cert.support);
  const double radius = spectral_radius(beta1);
  result.report.add(make_check("certificate_gap_identity", cert.identity_residual,
                               result.tol.isometry * (1.0 + beta1.max_norm()),
                               "support=" + std::to_string(cert.support)));
  const bool non_isometric = radius > cert.tolerance;
  std::ostringstream os;
  os.precision(6);
  os << "gap=" << cert.gap << ", beta_1_radius=" << radius << ", found="
     << (cert.found ? "yes" : "no");
  result.report.add(make_check("nonisomorphism_dichotomy", cert.found == non_isometric ? 0.0 : 1.0,
                               0.0, os.str()));
}

ordered_json flag_json(const FlagResidual& f) {
  ordered_json j;
  j["holds"] = f.flag;
  j["residual"] = f.residual;
  return j;
}

ordered_json weights_json(const ShiftWeights& w, std::size_t count) {
  ordered_json arr = ordered_json::array();
  for (std::size_t n = 1; n <= std::min(count, w.weights.size()); ++n) {
    const auto& s = w.weights[n - 1];
    ordered_json e;
    e["n"] = n;
    if (off_diagonal_norm(s.matrix()) <= 1e-13) {
      e["diagonal"] = s.matrix().real_diagonal();
    } else {
      e["norm"] = spectral_radius(s);
    }
    arr.push_back(std::move(e));
  }
  return arr;
}

ordered_json q_json(const QSolution& q, const OperatorSpecFile& spec) {
  ordered_json j;
  j["method"] = to_string(q.method);
  j["q0"] = q.q_seq ? q.q_seq->front() : (q.q.dim() > 0 ? q.q(0, 0).real() : 0.0);
  if (q.q_seq) {
    j["horizon"] = spec.truncation.effective_horizon();
    std::vector<double> head(q.q_seq->begin(),
                             q.q_seq->begin() + static_cast<std::ptrdiff_t>(
                                                    std::min<std::size_t>(9, q.q_seq->size())));
    j["q_head"] = head;
  }
  j["stein_residual"] = q.stein_residual;
  j["dominance_residual"] = q.dominance_residual;
  j["iterations"] = q.iterations;
  return j;
}

ordered_json model_json(const AssembledDilation& d) {
  const auto& model = d.model;
  ordered_json j;
  j["path"] = to_string(model.path);
  j["m"] = model.m;
  j["dim_H"] = d.h_dim;
  j["dim_Hprime"] = d.hprime_dim;
  j["n_blocks"] = d.n_blocks;
  j["total_dim"] = d.total_dim();
  j["window"] = model.window.valid_dim;
  j["norm_B"] = spectral_radius(model.b);
  j["ratio_bound_C"] = model.ratio_bound_c;
  j["rayleigh_bound"] = model.rayleigh_bound;
  j["welldef_residual"] = model.welldef_residual;
  if (model.q) j["q_solution"] = q_json(*model.q, {});
  j["weights"] = weights_json(d.weights, 8);
  return j;
}

ordered_json check_json(const CheckResult& c) {
  ordered_json j;
  j["name"] = c.name;
  j["residual"] = c.residual;
  j["tolerance"] = c.tolerance;
  j["passed"] = c.passed;
  j["window"] = c.window;
  return j;
}

OperatorSpecFile make_demo(std::string_view name) {
  OperatorSpecFile s;
  s.truncation.n_blocks = 6;
  if (name == "dirichlet-2iso") {
    s.op.rule = WeightRule::dirichlet();
    s.m = 2;
    s.truncation.n = 32;
  } else if (name == "strict-2concave") {
    s.op.rule = WeightRule::geometric_concave(0.5);
    s.m = 2;
    s.truncation.n = 32;
  } else if (name == "nonisomorphic-pair") {
    s.op.rule = WeightRule::geometric_concave(0.5);
    s.m = 2;
    s.path = DilationPath::general_m;
    s.truncation.n = 32;
  } else if (name == "scalar-3concave") {
    s.op.kind = OperatorSpec::Kind::dense;
    s.op.entries = ComplexMatrix(1, 1, {Complex(std::numbers::sqrt2 / 2.0, 0.0)});
    s.m = 3;
    s.truncation.n = 1;
  } else if (name == "zero-operator") {
    s.op.kind = OperatorSpec::Kind::dense;
    s.op.entries = ComplexMatrix(1, 1);
    s.m = 3;
    s.truncation.n = 1;
  } else if (name == "unitary") {
    // normalized 4-point DFT: entries (-i)^{jk} / 2
    s.op.kind = OperatorSpec::Kind::dense;
    const Complex powers[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    std::vector<Complex> e;
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) e.push_back(0.5 * powers[(j * k) % 4]);
    s.op.entries = ComplexMatrix(4, 4, std::move(e));
    s.m = 2;
    s.truncation.n = 4;
  } else {
    throw Error(ErrorCode::unknown_demo, "unknown demo '" + std::string(name) + "'");
  }
  return s;
}

}  // namespace

std::optional<DilationPath> select_path(const Classification& c, int m) {
  if (c.expansive.flag && c.m_concave.flag) return DilationPath::general_m;
  if (m == 3 && !c.expansive.flag && c.m_concave.flag && c.delta_psd.flag)
    return DilationPath::three_concave;
  return std::nullopt;
}

OperatorCorner make_operator(const OperatorSpecFile& spec) {
  if (spec.op.kind == OperatorSpec::Kind::shift) {
    if (!spec.op.rule) throw Error(ErrorCode::validation_error, "shift operator without a rule");
    return make_shift_corner(*spec.op.rule, spec.truncation.n);
  }
  return make_finite_operator(spec.op.entries);
}

PipelineResult classify_spec(const OperatorSpecFile& spec) {
  PipelineResult result;
  result.spec = spec;
  try {
    result.tol = resolve_tolerances(spec);
    const auto t = make_operator(spec);
    result.classification = classify(t, spec.m, result.tol);
    result.path = spec.path ? spec.path : select_path(*result.classification, spec.m);
    if (!result.path)
      throw Error(ErrorCode::precondition_failed,
                  "no construction path applies for m=" + std::to_string(spec.m) + ": " +
                      describe_classification(*result.classification));
    require_path_preconditions(*result.path, *result.classification, spec.m);
  } catch (const Error& e) {
    result.error = PipelineError{e.code(), e.what()};
  }
  return result;
}

PipelineResult run_pipeline(const OperatorSpecFile& spec) {
  PipelineResult result = classify_spec(spec);
  result.trials.trials = spec.trials.value_or(kDefaultTrials);
  result.trials.seed = spec.seed.value_or(kDefaultSeed);
  if (result.error) return result;
  const Tolerances& tol = result.tol;
  try {
    const auto t = make_operator(spec);
    const int m = spec.m;
    const std::size_t n_blocks = spec.truncation.n_blocks;
    const DilationPath path = *result.path;
    std::optional<QSolution> q;
    if (path != DilationPath::three_concave) q = solve_q(spec, t, tol);

    if (path == DilationPath::general_m) {
      const auto model = build_general_model(t, m, *q, tol);
      result.dilation = build_dilation(model, n_blocks, tol);
    } else if (path == DilationPath::three_concave) {
      const auto model = build_three_concave_model(t, tol);
      result.dilation = build_dilation(model, n_blocks, tol);
    } else {
      result.dilation = build_badea_2iso(t, *q, n_blocks, tol);
    }
    result.report = verify_dilation(*result.dilation, result.trials, tol);

    if (path == DilationPath::general_m && spec.op.kind == OperatorSpec::Kind::shift && !spec.q0)
      result.report.add(check_oracle_equivalence(result.dilation->model, *spec.op.rule,
                                                 spec.truncation.effective_horizon(), 8, tol));

    if (m == 2 && path == DilationPath::general_m) {
      result.badea = build_badea_2iso(t, *q, n_blocks, tol);
      const auto badea_report = verify_dilation(*result.badea, result.trials, tol);
      for (auto c : badea_report.checks) {
        c.name = "badea." + c.name;
        result.report.add(std::move(c));
      }
      result.certificate = nonisomorphism_certificate(*result.dilation, *result.badea, tol);
      add_certificate_checks(result, *result.certificate);
    }
  } catch (const Error& e) {
    result.error = PipelineError{e.code(), e.what()};
  }
  return result;
}

std::string render_report(const PipelineResult& result, const ReportOptions& options) {
  ordered_json j;
  ordered_json header;
  header["tool"] = "mdilate";
  header["version"] = kVersion;
  if (!options.timestamp.empty()) header["timestamp"] = options.timestamp;
  j["schema_version"] = kSchemaVersion;
  j["header"] = std::move(header);
  j["input"] = ordered_json::parse(emit_spec(result.spec));
  j["seed"] = result.trials.seed;
  j["trials"] = result.trials.trials;
  ordered_json tol = ordered_json::object();
  for (const auto& [k, v] : result.tol.entries()) tol[k] = v;
  j["tolerances"] = std::move(tol);

  if (result.classification) {
    const auto& c = *result.classification;
    ordered_json cj;
    cj["m"] = c.m;
    cj["expansive"] = flag_json(c.expansive);
    cj["m_concave"] = flag_json(c.m_concave);
    cj["m_isometric"] = flag_json(c.m_isometric);
    cj["delta_psd"] = flag_json(c.delta_psd);
    cj["beta_m_window"] = c.beta_m_window.valid_dim;
    cj["delta_window"] = c.delta_window.valid_dim;
    j["classification"] = std::move(cj);
  }
  j["path"] = result.path ? ordered_json(to_string(*result.path)) : ordered_json(nullptr);
  if (result.dilation) {
    if (result.dilation->model.q) j["q_solution"] = q_json(*result.dilation->model.q, result.spec);
    j["model"] = model_json(*result.dilation);
  }
  if (result.badea) j["badea_model"] = model_json(*result.badea);
  if (result.certificate) {
    const auto& c = *result.certificate;
    ordered_json cj;
    cj["found"] = c.found;
    cj["gap"] = c.gap;
    cj["gap_e0"] = c.gap_e0;
    cj["tolerance"] = c.tolerance;
    cj["support"] = c.support;
    cj["identity_residual"] = c.identity_residual;
    cj["note"] = c.found ? "T is not isometric on the support: W and W' are not isomorphic"
                         : "T is isometric on the support: no norm-gap obstruction";
    j["certificate"] = std::move(cj);
  }
  ordered_json checks = ordered_json::array();
  for (const auto& c : result.report.checks) checks.push_back(check_json(c));
  j["checks"] = std::move(checks);
  if (result.error) {
    ordered_json e;
    e["code"] = std::string(to_string(result.error->code));
    e["message"] = result.error->message;
    j["error"] = std::move(e);
  }
  j["overall"] = result.overall();
  return j.dump(2) + "\n";
}

std::string report_timestamp() {
  std::time_t when = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end && *end == '\0') when = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&when, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int exit_code(const PipelineResult& result) {
  if (result.error) {
    switch (result.error->code) {
      case ErrorCode::precondition_failed: return 2;
      case ErrorCode::parse_error:
      case ErrorCode::validation_error: return 3;
      default: return 1;
    }
  }
  return result.report.overall ? 0 : 1;
}

std::vector<std::string> demo_names() {
  return {"dirichlet-2iso", "strict-2concave", "scalar-3concave",
          "zero-operator",  "unitary",         "nonisomorphic-pair"};
}

OperatorSpecFile demo_spec(std::string_view name) { return make_demo(name); }

}  // namespace mdilate
