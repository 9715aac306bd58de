#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "groundrisk/records.hpp"
#include "groundrisk/risk.hpp"
#include "groundrisk/uq.hpp"

namespace groundrisk {

/// Where a calibration artifact's calibration split came from, so that later
/// stages can rebuild the matching test split.
struct SplitRef {
  double calibration_ratio = 0.2;
  std::uint64_t seed = 0;
  int repetition_index = 0;
  int repetitions = 1;
};

struct CalibrationArtifact {
  RiskSpec risk;
  UqVariant variant = UqVariant::Com;
  CalibrationOutcome outcome;
  std::optional<SplitRef> split;
};

nlohmann::ordered_json to_json(const CalibrationArtifact& artifact);
CalibrationArtifact calibration_artifact_from_json(const nlohmann::json& j);

/// Attaches the scored fields to a record: uq components and, when the
/// score carries one, pc.
void attach_score(GroundingRecord& record, const UncertaintyScore& score);

}  // namespace groundrisk
