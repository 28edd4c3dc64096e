#include <cmath>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mdilate/errors.hpp"
#include "mdilate/pipeline.hpp"

using namespace mdilate;
using nlohmann::json;

namespace {

OperatorSpecFile scalar_spec(double t, int m) {
  OperatorSpecFile s;
  s.op.kind = OperatorSpec::Kind::dense;
  s.op.entries = ComplexMatrix(1, 1, {Complex(t)});
  s.m = m;
  s.truncation.n = 1;
  s.truncation.n_blocks = 6;
  return s;
}

json report_of(const PipelineResult& r) { return json::parse(render_report(r)); }

}  // namespace

TEST_CASE("scalar 1/sqrt 2, m = 3 takes the 3-concave path and reports the weights") {
  const auto r = run_pipeline(scalar_spec(0.70710678, 3));
  CHECK(r.overall());
  REQUIRE(r.path);
  CHECK(*r.path == DilationPath::three_concave);
  const auto j = report_of(r);
  const auto& w = j["model"]["weights"];
  const double expected[] = {1.0, 1.118034, 1.183216};
  for (int n = 0; n < 3; ++n)
    CHECK(w[n]["diagonal"][0].get<double>() == doctest::Approx(expected[n]).epsilon(1e-6));
  CHECK(exit_code(r) == 0);
}

TEST_CASE("scalar 1.5, m = 2 fails the preconditions with the residuals") {
  const auto r = run_pipeline(scalar_spec(1.5, 2));
  REQUIRE(r.error);
  CHECK(r.error->code == ErrorCode::precondition_failed);
  CHECK(r.error->message.find("1.5625") != std::string::npos);
  CHECK(exit_code(r) == 2);
  CHECK(report_of(r)["overall"] == false);
}

TEST_CASE("dirichlet pipeline passes and certificate follows beta_1") {
  const auto r = run_pipeline(demo_spec("dirichlet-2iso"));
  CHECK(r.overall());
  REQUIRE(r.certificate);
  REQUIRE(r.badea);
  CHECK(r.badea->hprime_dim == 0);
  CHECK(std::abs(r.certificate->gap_e0 - 1.0) <= 1e-10);
  const auto* q = r.dilation->model.q ? &*r.dilation->model.q : nullptr;
  REQUIRE(q);
  for (std::size_t n = 0; n < 8; ++n) CHECK(std::abs((*q->q_seq)[n] - 1.0 / (n + 1.0)) <= 1e-12);
}

TEST_CASE("every demo passes") {
  for (const auto& name : demo_names()) {
    CAPTURE(name);
    const auto r = run_pipeline(demo_spec(name));
    CHECK(r.overall());
    CHECK(exit_code(r) == 0);
    CHECK_FALSE(r.report.checks.empty());
  }
}

TEST_CASE("demo specifics") {
  const auto zero = run_pipeline(demo_spec("zero-operator"));
  CHECK(*zero.path == DilationPath::three_concave);
  CHECK(zero.dilation->hprime_dim == 1);
  CHECK(std::abs(std::abs(zero.dilation->model.u(0, 0)) - 1.0) <= 1e-14);

  const auto unitary = run_pipeline(demo_spec("unitary"));
  CHECK(unitary.dilation->hprime_dim == 0);
  CHECK(unitary.dilation->w == unitary.dilation->model.t.matrix);

  const auto pair = run_pipeline(demo_spec("nonisomorphic-pair"));
  REQUIRE(pair.certificate);
  CHECK(pair.certificate->found);
  CHECK(std::abs(pair.certificate->gap - 0.5) <= 1e-10);
  CHECK(pair.report.find("minimality")->passed);
  CHECK(pair.report.find("badea.minimality")->passed);
}

TEST_CASE("unknown demo") {
  try {
    (void)demo_spec("nope");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unknown_demo);
  }
}

TEST_CASE("reports are byte-stable and the timestamp sits only in the header") {
  const auto spec = demo_spec("strict-2concave");
  const auto a = render_report(run_pipeline(spec), {"2020-01-01T00:00:00Z"});
  const auto b = render_report(run_pipeline(spec), {"2020-01-01T00:00:00Z"});
  CHECK(a == b);
  const auto j = json::parse(a);
  CHECK(j["header"]["timestamp"] == "2020-01-01T00:00:00Z");
  CHECK(j["checks"].dump().find("2020") == std::string::npos);
  CHECK(json::parse(render_report(run_pipeline(spec)))["header"].count("timestamp") == 0);
}

TEST_CASE("the echoed seed reproduces the residuals") {
  auto spec = demo_spec("strict-2concave");
  spec.seed = 12345;
  const auto j = report_of(run_pipeline(spec));
  auto again = parse_spec(j["input"].dump());
  const auto k = report_of(run_pipeline(again));
  CHECK(j["checks"] == k["checks"]);
  CHECK(j["seed"] == 12345);
}

TEST_CASE("report carries the documented sections") {
  const auto j = report_of(run_pipeline(demo_spec("strict-2concave")));
  for (const char* key : {"schema_version", "header", "input", "seed", "trials", "tolerances",
                          "classification", "path", "q_solution", "model", "badea_model",
                          "certificate", "checks", "overall"})
    CHECK(j.contains(key));
  CHECK(j["q_solution"]["q0"].get<double>() == doctest::Approx(0.5));
  for (const auto& c : j["checks"]) {
    for (const char* key : {"name", "residual", "tolerance", "passed", "window"}) CHECK(c.contains(key));
  }
}

TEST_CASE("doubling N and n_blocks keeps verdicts and residual scale") {
  for (const auto& name : demo_names()) {
    CAPTURE(name);
    auto spec = demo_spec(name);
    const auto base = run_pipeline(spec);
    if (spec.op.kind != OperatorSpec::Kind::shift) continue;
    spec.truncation.n *= 2;
    spec.truncation.n_blocks *= 2;
    const auto big = run_pipeline(spec);
    CHECK(big.overall() == base.overall());
    for (const auto& c : base.report.checks) {
      const auto* d = big.report.find(c.name);
      REQUIRE(d);
      CHECK(d->passed == c.passed);
      CHECK(std::abs(d->residual - c.residual) <= 10.0 * std::max(c.tolerance, 1e-300));
    }
  }
}
