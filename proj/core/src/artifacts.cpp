#include "groundrisk/artifacts.hpp"

#include <stdexcept>

namespace groundrisk {

nlohmann::ordered_json to_json(const CalibrationArtifact& a) {
  nlohmann::ordered_json j;
  j["alpha"] = a.risk.alpha;
  j["delta"] = a.risk.delta;
  j["feasible"] = a.outcome.feasible;
  if (a.outcome.threshold)
    j["threshold"] = *a.outcome.threshold;
  else
    j["threshold"] = nullptr;
  j["uq_variant"] = std::string(to_string(a.variant));
  auto trace = nlohmann::ordered_json::array();
  for (const TraceRow& row : a.outcome.trace) trace.push_back({row.tau, row.accepted, row.errors, row.bound});
  j["trace"] = std::move(trace);
  if (a.split) {
    j["split"] = {{"calibration_ratio", a.split->calibration_ratio},
                  {"seed", a.split->seed},
                  {"repetition_index", a.split->repetition_index},
                  {"repetitions", a.split->repetitions}};
  }
  return j;
}

CalibrationArtifact calibration_artifact_from_json(const nlohmann::json& j) {
  try {
    CalibrationArtifact a;
    a.risk.alpha = j.at("alpha").get<double>();
    a.risk.delta = j.at("delta").get<double>();
    a.outcome.feasible = j.at("feasible").get<bool>();
    if (j.contains("threshold") && !j["threshold"].is_null()) a.outcome.threshold = j["threshold"].get<double>();
    a.variant = parse_variant(j.at("uq_variant").get<std::string>());
    for (const auto& row : j.at("trace")) {
      if (!row.is_array() || row.size() != 4) throw std::invalid_argument("trace rows must be [tau, n, X, bound]");
      a.outcome.trace.push_back(
          {row[0].get<double>(), row[1].get<std::size_t>(), row[2].get<std::size_t>(), row[3].get<double>()});
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      a.split = SplitRef{s.at("calibration_ratio").get<double>(), s.at("seed").get<std::uint64_t>(),
                         s.at("repetition_index").get<int>(), s.at("repetitions").get<int>()};
    }
    if (a.outcome.feasible != a.outcome.threshold.has_value())
      throw std::invalid_argument("feasible flag and threshold disagree");
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("calibration artifact: ") + e.what());
  }
}

void attach_score(GroundingRecord& record, const UncertaintyScore& score) {
  record.uq = to_stored(score);
  if (score.pc) record.pc = score.pc;
}

}  // namespace groundrisk
