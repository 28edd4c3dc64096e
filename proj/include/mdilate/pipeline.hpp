#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdilate/dilation.hpp"
#include "mdilate/errors.hpp"
#include "mdilate/operator_model.hpp"
#include "mdilate/spec_io.hpp"
#include "mdilate/verifier.hpp"

namespace mdilate {

struct PipelineError {
  ErrorCode code;
  std::string message;
};

struct PipelineResult {
  OperatorSpecFile spec;
  Tolerances tol;
  TrialOptions trials;
  std::optional<Classification> classification;
  std::optional<DilationPath> path;
  std::optional<AssembledDilation> dilation;
  std::optional<AssembledDilation> badea;  // m = 2 only
  std::optional<Certificate> certificate;  // m = 2 only
  VerificationReport report;               // checks of both dilations
  std::optional<PipelineError> error;

  bool overall() const noexcept { return !error && report.overall; }
};

/// Path chosen by the classification, or nullopt when no path applies.
std::optional<DilationPath> select_path(const Classification& c, int m);

OperatorCorner make_operator(const OperatorSpecFile& spec);

/// classify -> solve Q -> build -> assemble -> verify. Library errors raised
/// after parsing are captured in `error`; `precondition_failed` when no path
/// applies.
PipelineResult run_pipeline(const OperatorSpecFile& spec);

/// Classification only.
PipelineResult classify_spec(const OperatorSpecFile& spec);

struct ReportOptions {
  std::string timestamp;  // header only; empty omits the field
};

std::string render_report(const PipelineResult& result, const ReportOptions& options = {});

/// SOURCE_DATE_EPOCH when set, else the current UTC time, ISO 8601.
std::string report_timestamp();

/// 0 on overall pass, 2 on precondition-failed, 1 otherwise.
int exit_code(const PipelineResult& result);

std::vector<std::string> demo_names();
/// Throws unknown_demo.
OperatorSpecFile demo_spec(std::string_view name);

}  // namespace mdilate
