#include "groundrisk/cascade.hpp"

#include <stdexcept>

#include "json.hpp"

#include "groundrisk/metrics.hpp"

namespace groundrisk {
namespace {

std::string missing_expert_message(const std::vector<std::string>& ids) {
  std::string msg = "deferred record(s) without an expert prediction:";
  for (const auto& id : ids) msg += " " + id;
  return msg;
}

void check_lengths(std::span<const GroundingRecord> records, std::span<const double> u) {
  if (records.size() != u.size())
    throw std::invalid_argument("cascade: records and uncertainties differ in length");
}

}  // namespace

MissingExpertError::MissingExpertError(std::vector<std::string> ids)
    : std::runtime_error(missing_expert_message(ids)), ids_(std::move(ids)) {}

Decision decide(double uncertainty, double threshold) {
  return uncertainty <= threshold ? Decision::Accept : Decision::Defer;
}

CascadeReport evaluate_cascade(std::span<const GroundingRecord> records, std::span<const double> u,
                               std::optional<double> threshold, std::uint64_t mlg_seed) {
  check_lengths(records, u);
  if (records.empty()) throw std::invalid_argument("cascade: no records");

  CascadeReport report;
  report.n_total = records.size();
  std::vector<std::string> missing;
  std::size_t primary_correct = 0;
  std::size_t expert_correct = 0;
  bool every_expert = true;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const GroundingRecord& r = records[i];
    const bool primary_ok = admission(select_mlg(r, mlg_seed), r.gt_box);
    primary_correct += primary_ok;
    if (r.expert)
      expert_correct += admission(*r.expert, r.gt_box);
    else
      every_expert = false;

    const Decision d = threshold ? decide(u[i], *threshold) : Decision::Defer;
    if (d == Decision::Accept) {
      ++report.accepted;
      report.accepted_correct += primary_ok;
    } else {
      ++report.deferred;
      if (!r.expert) {
        missing.push_back(r.id);
        continue;
      }
      report.deferred_correct += admission(*r.expert, r.gt_box);
    }
  }
  if (!missing.empty()) throw MissingExpertError(std::move(missing));

  const double n = static_cast<double>(report.n_total);
  report.system_accuracy = static_cast<double>(report.accepted_correct + report.deferred_correct) / n;
  report.primary_accuracy = static_cast<double>(primary_correct) / n;
  if (every_expert) report.expert_only_accuracy = static_cast<double>(expert_correct) / n;
  report.cascading_rate = static_cast<double>(report.deferred) / n;
  return report;
}

std::vector<DeferralEntry> emit_deferrals(std::span<const GroundingRecord> records,
                                          std::span<const double> u, std::optional<double> threshold) {
  check_lengths(records, u);
  std::vector<DeferralEntry> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!threshold || decide(u[i], *threshold) == Decision::Defer)
      out.push_back({records[i].id, records[i].instruction});
  return out;
}

std::string serialize_manifest(std::span<const DeferralEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    if (e.instruction) j["instruction"] = *e.instruction;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace groundrisk
