#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace groundrisk {

/// Screen coordinate in pixels. Origin top-left, x right, y down.
struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned ground-truth rectangle in (possibly fractional) pixels.
struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  friend bool operator==(const Box&, const Box&) = default;
};

/// Uncertainty components as persisted in a scored record file.
struct StoredUncertainty {
  double ta = 0.0;
  double ie = 0.0;
  double cd = 0.0;
  double com = 0.0;
  friend bool operator==(const StoredUncertainty&, const StoredUncertainty&) = default;
};

/// One grounding instance: screenshot geometry, target box, K stochastic
/// clicks and the optional primary/expert predictions.
struct GroundingRecord {
  std::string id;
  int image_width = 0;
  int image_height = 0;
  std::optional<std::string> instruction;
  Box gt_box;
  std::vector<Point> samples;
  std::optional<Point> mlg;
  std::optional<Point> expert;
  std::optional<double> pc;
  std::optional<StoredUncertainty> uq;
  /// Keys not covered above, carried through untouched.
  nlohmann::json extras = nlohmann::json::object();

  friend bool operator==(const GroundingRecord&, const GroundingRecord&) = default;
};

/// Raised for malformed input or violated record invariants. `line` is
/// 1-based and 0 when the record did not come from a file.
class RecordError : public std::runtime_error {
 public:
  RecordError(std::size_t line, std::string field, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }
  /// The message without the line and field prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::string field_;
  std::string message_;
};

/// Throws RecordError naming the first offending field.
void validate(const GroundingRecord& record, std::size_t line = 0);

GroundingRecord parse_record(std::string_view line_text, std::size_t line = 0);

/// Reads line-delimited records. Blank lines are skipped but still counted
/// for error reporting. Ids must be unique.
std::vector<GroundingRecord> parse_records(std::istream& in);
std::vector<GroundingRecord> parse_records(std::string_view text);

nlohmann::ordered_json to_json(const GroundingRecord& record);
std::string serialize_record(const GroundingRecord& record);
std::string serialize_records(std::span<const GroundingRecord> records);

/// The prediction the system acts on: the explicit `mlg` when present,
/// otherwise one sample drawn uniformly with a seed derived from
/// (seed, record.id).
Point select_mlg(const GroundingRecord& record, std::uint64_t seed);

struct SplitPlan {
  double calibration_ratio = 0.2;
  std::uint64_t seed = 0;
  int repetitions = 1;

  /// Throws std::invalid_argument unless both sides are non-empty for
  /// `dataset_size` records.
  void validate(std::size_t dataset_size) const;
};

/// round-half-up(ratio * total), clamped to [1, total - 1].
std::size_t calibration_size(std::size_t total, double ratio);

struct SplitIndices {
  std::vector<std::size_t> calibration;
  std::vector<std::size_t> test;
};

/// Seeded permutation split. Both index lists are returned in ascending
/// order of the original position.
SplitIndices split_indices(std::size_t total, const SplitPlan& plan, int repetition_index);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(std::span<const T> items, const SplitPlan& plan,
                                                int repetition_index) {
  const SplitIndices idx = split_indices(items.size(), plan, repetition_index);
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(idx.calibration.size());
  out.second.reserve(idx.test.size());
  for (std::size_t i : idx.calibration) out.first.push_back(items[i]);
  for (std::size_t i : idx.test) out.second.push_back(items[i]);
  return out;
}

}  // namespace groundrisk
