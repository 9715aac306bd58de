#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "groundrisk/records.hpp"

namespace groundrisk {

enum class Decision { Accept, Defer };

/// Accept iff uncertainty <= threshold.
Decision decide(double uncertainty, double threshold);

struct CascadeReport {
  double system_accuracy = 0.0;
  double primary_accuracy = 0.0;
  /// Present only when every record carries an expert prediction.
  std::optional<double> expert_only_accuracy;
  double cascading_rate = 0.0;
  std::size_t n_total = 0;
  std::size_t accepted = 0;
  std::size_t deferred = 0;
  std::size_t accepted_correct = 0;
  std::size_t deferred_correct = 0;
};

/// Raised when a deferred record has no expert prediction to fall back on.
class MissingExpertError : public std::runtime_error {
 public:
  explicit MissingExpertError(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

/// Routes each record to its primary prediction (select_mlg with
/// `mlg_seed`) or to its recorded expert prediction and scores the result.
/// A threshold of nullopt defers everything.
CascadeReport evaluate_cascade(std::span<const GroundingRecord> records,
                               std::span<const double> uncertainties,
                               std::optional<double> threshold, std::uint64_t mlg_seed);

struct DeferralEntry {
  std::string id;
  std::optional<std::string> instruction;
};

std::vector<DeferralEntry> emit_deferrals(std::span<const GroundingRecord> records,
                                          std::span<const double> uncertainties,
                                          std::optional<double> threshold);

/// One {"id", "instruction"?} object per line.
std::string serialize_manifest(std::span<const DeferralEntry> entries);

}  // namespace groundrisk
