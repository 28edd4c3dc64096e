#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdilate {

enum class ErrorCode {
  dimension_mismatch,
  non_finite,
  not_hermitian,
  not_psd,
  no_convergence,
  not_invertible,
  invalid_rule,
  window_exhausted,
  q0_unbounded,
  ill_defined_form,
  not_negative,
  precondition_failed,
  parse_error,
  validation_error,
  unknown_demo,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported through this type; `code()` names the
/// failure class so callers (CLI exit codes, Python bindings) can dispatch.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mdilate
