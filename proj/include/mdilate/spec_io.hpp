#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "mdilate/dilation.hpp"
#include "mdilate/matrix.hpp"
#include "mdilate/operator_model.hpp"

namespace mdilate {

inline constexpr int kSchemaVersion = 1;

struct OperatorSpec {
  enum class Kind { dense, shift };
  Kind kind = Kind::shift;
  ComplexMatrix entries;          // dense
  std::optional<WeightRule> rule; // shift

  friend bool operator==(const OperatorSpec&, const OperatorSpec&) = default;
};

struct Truncation {
  std::size_t n = 0;        // shift corner size; dense: equals the matrix size
  std::size_t n_blocks = 0;
  std::size_t horizon = 0;  // 0 selects 4 N

  std::size_t effective_horizon() const noexcept { return horizon == 0 ? 4 * n : horizon; }
  friend bool operator==(const Truncation&, const Truncation&) = default;
};

struct OperatorSpecFile {
  int schema_version = kSchemaVersion;
  OperatorSpec op;
  int m = 0;
  std::optional<DilationPath> path;
  Truncation truncation;
  std::map<std::string, double> tolerances;  // overrides by Tolerances field name
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<double> q0;  // diagonal solver override, shift operators only

  friend bool operator==(const OperatorSpecFile&, const OperatorSpecFile&) = default;
};

/// Throws parse_error (malformed text, with line and column) or
/// validation_error (one line per problem, each prefixed by its JSON path).
OperatorSpecFile parse_spec(std::string_view text);
OperatorSpecFile load_spec(const std::string& path);

/// Canonical JSON text; parse_spec(emit_spec(s)) == s.
std::string emit_spec(const OperatorSpecFile& spec);

std::optional<DilationPath> path_from_string(std::string_view name);

/// Tolerances with the spec overrides applied.
Tolerances resolve_tolerances(const OperatorSpecFile& spec);

}  // namespace mdilate
