#include "mdilate/errors.hpp"

namespace mdilate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::non_finite: return "non-finite";
    case ErrorCode::not_hermitian: return "not-hermitian";
    case ErrorCode::not_psd: return "not-psd";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::not_invertible: return "not-invertible";
    case ErrorCode::invalid_rule: return "invalid-rule";
    case ErrorCode::window_exhausted: return "window-exhausted";
    case ErrorCode::q0_unbounded: return "q0-unbounded";
    case ErrorCode::ill_defined_form: return "ill-defined-form";
    case ErrorCode::not_negative: return "not-negative";
    case ErrorCode::precondition_failed: return "precondition-failed";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::validation_error: return "validation-error";
    case ErrorCode::unknown_demo: return "unknown-demo";
  }
  return "unknown";
}

}  // namespace mdilate
