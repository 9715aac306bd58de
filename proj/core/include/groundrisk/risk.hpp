#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace groundrisk {

/// Target false discovery rate `alpha` held with probability 1 - `delta`.
struct RiskSpec {
  double alpha = 0.1;
  double delta = 0.05;

  /// Throws std::invalid_argument unless both lie strictly inside (0, 1).
  void validate() const;
};

/// Exact (Clopper-Pearson) upper confidence bound on an error rate after
/// observing `errors` failures among `accepted` trials: the (1 - delta)
/// quantile of Beta(errors + 1, accepted - errors), and 1 when every trial
/// failed. Throws std::invalid_argument for accepted == 0, errors > accepted
/// or delta outside (0, 1).
double cp_upper_bound(std::size_t errors, std::size_t accepted, double delta);

/// Fraction of accepted points (u <= tau) flagged as errors; 0 when nothing
/// is accepted. Flags must be 0 or 1.
double empirical_fdr(std::span<const double> uncertainties, std::span<const std::uint8_t> errors,
                     double tau);

struct TraceRow {
  double tau = 0.0;
  std::size_t accepted = 0;
  std::size_t errors = 0;
  double bound = 0.0;
};

/// Result of threshold calibration. An unattainable risk level is a normal
/// outcome: feasible == false and no threshold.
struct CalibrationOutcome {
  bool feasible = false;
  std::optional<double> threshold;
  std::vector<TraceRow> trace;
};

/// Scans the distinct uncertainty values in ascending order, bounds the FDR
/// of accepting everything at or below each, and returns the largest
/// candidate whose bound is within alpha.
CalibrationOutcome calibrate_threshold(std::span<const double> uncertainties,
                                       std::span<const std::uint8_t> errors, const RiskSpec& spec);

}  // namespace groundrisk
