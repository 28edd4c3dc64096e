#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mdilate {

/// Numerical thresholds. Kernel tolerances are relative to (1 + max-norm)
/// of the operand they test; check tolerances bound verifier residuals.
struct Tolerances {
  // kernel
  double herm = 1e-9;
  double psd = 1e-9;
  double sqrt = 1e-9;
  double rank = 1e-10;
  double eig = 1e-11;
  double comm = 1e-9;
  double inv = 1e-12;
  int eig_sweeps = 64;

  // q-solver and builder
  double stein = 1e-10;
  double welldef = 1e-9;
  double fixed_point_step = 1e-13;
  int fixed_point_iterations = 10000;
  double plateau = 1e-12;

  // verifier
  double dilation = 1e-12;
  double powers = 1e-11;
  double isometry = 1e-10;
  double criterion = 1e-10;
  double difference = 1e-11;
  double oracle = 1e-10;
  double remark = 1e-9;
  double minimality_rank = 1e-9;
  double cert = 1e-6;

  /// Sets a tolerance by name (the member name, e.g. "psd" or "cert").
  /// Returns false when the name is unknown.
  bool set(std::string_view name, double value);
  /// Name/value pairs in declaration order, for reports.
  std::vector<std::pair<std::string, double>> entries() const;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

}  // namespace mdilate
