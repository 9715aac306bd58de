#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "groundrisk/records.hpp"
#include "groundrisk/risk.hpp"
#include "groundrisk/uq.hpp"

namespace groundrisk {

/// Synthetic grounding data with a controllable coupling between sample
/// dispersion and correctness.
///
/// "Easy" records draw every sample from a tight cloud kept inside the
/// target box, so their primary prediction is always admissible. "Hard"
/// records draw samples from one to three modes scattered around the box at
/// up to `dispersion` pixels; whether the primary prediction lands inside
/// the box is left to chance.
struct SynthConfig {
  std::size_t n_records = 1000;
  int k_samples = 10;
  int image_width = 640;
  int image_height = 480;
  int box_width = 42;
  int box_height = 28;
  double easy_fraction = 0.6;
  double dispersion = 120.0;
  double expert_accuracy = 0.9;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument.
  void validate() const;
};

std::vector<GroundingRecord> generate_dataset(const SynthConfig& config);

struct TrialOutcome {
  bool feasible = false;
  std::optional<double> threshold;
  double calibration_bound = 0.0;  // trace bound at the threshold
  double test_fdr = 0.0;
  std::size_t test_accepted = 0;
};

struct GuaranteeResult {
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t infeasible = 0;
  double alpha = 0.0;
  double delta = 0.0;
  std::vector<TrialOutcome> outcomes;

  /// violations / trials. An infeasible trial accepts nothing, so its test
  /// FDR is 0 and it never violates.
  double violation_rate() const;
  /// violations / feasible trials; 0 when no trial was feasible.
  double conditional_violation_rate() const;
};

struct GuaranteeOptions {
  RiskSpec risk;
  UqConfig uq;
  UqVariant variant = UqVariant::Com;
  double calibration_ratio = 0.2;
  std::size_t trials = 1000;
  unsigned threads = 0;
};

/// One calibrate-then-test round on a given dataset: split with
/// `split_seed`, calibrate on the calibration part, measure the FDR on the
/// test part at the calibrated threshold.
TrialOutcome run_trial(std::span<const GroundingRecord> records, const GuaranteeOptions& options,
                       std::uint64_t split_seed, std::uint64_t mlg_seed);

/// Each trial draws a fresh dataset and split (seeds derived from
/// config.seed and the trial index), calibrates on the calibration part and
/// measures the realized FDR on the test part at the calibrated threshold.
GuaranteeResult run_guarantee_trials(const SynthConfig& config, const GuaranteeOptions& options);

}  // namespace groundrisk
