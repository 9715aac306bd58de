#include "groundrisk/records.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "groundrisk/util.hpp"

namespace groundrisk {
namespace {

using nlohmann::json;

std::string describe(std::size_t line, const std::string& field, const std::string& message) {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!field.empty()) out += field + ": ";
  return out + message;
}

[[noreturn]] void fail(std::size_t line, const std::string& field, const std::string& message) {
  throw RecordError(line, field, message);
}

double number_at(const json& value, std::size_t line, const std::string& field) {
  if (!value.is_number()) fail(line, field, "expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) fail(line, field, "non-finite value");
  return v;
}

Point point_from(const json& value, std::size_t line, const std::string& field) {
  if (!value.is_array() || value.size() != 2) fail(line, field, "expected [x, y]");
  return {number_at(value[0], line, field), number_at(value[1], line, field)};
}

bool present(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it != obj.end() && !it->is_null();
}

}  // namespace

RecordError::RecordError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(describe(line, field, message)), line_(line), field_(std::move(field)), message_(message) {}

void validate(const GroundingRecord& r, std::size_t line) {
  if (r.id.empty()) fail(line, "id", "must be a non-empty string");
  if (r.image_width <= 0 || r.image_height <= 0)
    fail(line, "image", "width and height must be positive");

  const Box& b = r.gt_box;
  for (double v : {b.x_min, b.y_min, b.x_max, b.y_max})
    if (!std::isfinite(v)) fail(line, "gt_box", "non-finite coordinate");
  if (!(b.x_min < b.x_max)) fail(line, "gt_box", "x_min must be < x_max");
  if (!(b.y_min < b.y_max)) fail(line, "gt_box", "y_min must be < y_max");
  if (b.x_min < 0 || b.y_min < 0 || b.x_max > r.image_width || b.y_max > r.image_height)
    fail(line, "gt_box", "box must lie within the image");

  if (r.samples.empty()) fail(line, "samples", "must contain at least one coordinate");
  for (const Point& p : r.samples)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) fail(line, "samples", "non-finite coordinate");

  if (r.mlg && (!std::isfinite(r.mlg->x) || !std::isfinite(r.mlg->y)))
    fail(line, "mlg", "non-finite coordinate");
  if (r.expert && (!std::isfinite(r.expert->x) || !std::isfinite(r.expert->y)))
    fail(line, "expert", "non-finite coordinate");
  if (r.pc && !(*r.pc >= 0.0 && *r.pc <= 1.0)) fail(line, "pc", "must lie in [0, 1]");
}

GroundingRecord parse_record(std::string_view line_text, std::size_t line) {
  json j;
  try {
    j = json::parse(line_text);
  } catch (const json::parse_error& e) {
    fail(line, "", std::string("malformed record: ") + e.what());
  }
  if (!j.is_object()) fail(line, "", "record must be a JSON object");

  GroundingRecord r;

  if (!j.contains("id") || !j["id"].is_string()) fail(line, "id", "missing or not a string");
  r.id = j["id"].get<std::string>();

  if (!j.contains("image") || !j["image"].is_object()) fail(line, "image", "missing {\"w\", \"h\"}");
  const json& image = j["image"];
  for (const char* key : {"w", "h"})
    if (!image.contains(key) || !image[key].is_number_integer())
      fail(line, "image", std::string("\"") + key + "\" must be an integer");
  r.image_width = image["w"].get<int>();
  r.image_height = image["h"].get<int>();

  if (present(j, "instruction")) {
    if (!j["instruction"].is_string()) fail(line, "instruction", "expected a string");
    r.instruction = j["instruction"].get<std::string>();
  }

  if (!j.contains("gt_box") || !j["gt_box"].is_array() || j["gt_box"].size() != 4)
    fail(line, "gt_box", "expected [x_min, y_min, x_max, y_max]");
  const json& box = j["gt_box"];
  r.gt_box = {number_at(box[0], line, "gt_box"), number_at(box[1], line, "gt_box"),
              number_at(box[2], line, "gt_box"), number_at(box[3], line, "gt_box")};

  if (!j.contains("samples") || !j["samples"].is_array())
    fail(line, "samples", "expected a list of [x, y]");
  r.samples.reserve(j["samples"].size());
  for (const json& s : j["samples"]) r.samples.push_back(point_from(s, line, "samples"));

  if (present(j, "mlg")) r.mlg = point_from(j["mlg"], line, "mlg");
  if (present(j, "expert")) r.expert = point_from(j["expert"], line, "expert");
  if (present(j, "pc")) r.pc = number_at(j["pc"], line, "pc");

  if (present(j, "uq")) {
    const json& uq = j["uq"];
    if (!uq.is_object()) fail(line, "uq", "expected an object");
    StoredUncertainty s;
    auto get = [&](const char* key) {
      if (!uq.contains(key)) fail(line, std::string("uq.") + key, "missing");
      return number_at(uq[key], line, std::string("uq.") + key);
    };
    s.ta = get("ta");
    s.ie = get("ie");
    s.cd = get("cd");
    s.com = get("com");
    r.uq = s;
  }

  static constexpr std::string_view kKnown[] = {"id",  "image",  "instruction", "gt_box", "samples",
                                                "mlg", "expert", "pc",          "uq"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(std::begin(kKnown), std::end(kKnown), it.key()) == std::end(kKnown))
      r.extras[it.key()] = it.value();

  validate(r, line);
  return r;
}

std::vector<GroundingRecord> parse_records(std::istream& in) {
  std::vector<GroundingRecord> records;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    GroundingRecord r = parse_record(text, line);
    auto [it, inserted] = first_seen.emplace(r.id, line);
    if (!inserted)
      fail(line, "id", "duplicate id '" + r.id + "' (first seen on line " +
                           std::to_string(it->second) + ")");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<GroundingRecord> parse_records(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_records(in);
}

nlohmann::ordered_json to_json(const GroundingRecord& r) {
  // Schema order; unknown keys follow.
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["image"] = {{"w", r.image_width}, {"h", r.image_height}};
  if (r.instruction) j["instruction"] = *r.instruction;
  j["gt_box"] = {r.gt_box.x_min, r.gt_box.y_min, r.gt_box.x_max, r.gt_box.y_max};
  auto samples = nlohmann::ordered_json::array();
  for (const Point& p : r.samples) samples.push_back({p.x, p.y});
  j["samples"] = std::move(samples);
  if (r.mlg) j["mlg"] = {r.mlg->x, r.mlg->y};
  if (r.expert) j["expert"] = {r.expert->x, r.expert->y};
  if (r.pc) j["pc"] = *r.pc;
  if (r.uq) j["uq"] = {{"ta", r.uq->ta}, {"ie", r.uq->ie}, {"cd", r.uq->cd}, {"com", r.uq->com}};
  for (auto it = r.extras.begin(); it != r.extras.end(); ++it) j[it.key()] = it.value();
  return j;
}

std::string serialize_record(const GroundingRecord& r) { return to_json(r).dump(); }

std::string serialize_records(std::span<const GroundingRecord> records) {
  std::string out;
  for (const GroundingRecord& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

Point select_mlg(const GroundingRecord& record, std::uint64_t seed) {
  if (record.mlg) return *record.mlg;
  if (record.samples.empty()) throw RecordError(0, "samples", "no sample to select from");
  Rng rng(derive_seed(seed, record.id));
  return record.samples[rng.below(record.samples.size())];
}

void SplitPlan::validate(std::size_t dataset_size) const {
  if (!(calibration_ratio > 0.0 && calibration_ratio < 1.0))
    throw std::invalid_argument("split: calibration ratio must lie in (0, 1)");
  if (repetitions < 1) throw std::invalid_argument("split: repetitions must be positive");
  if (dataset_size < 2)
    throw std::invalid_argument("split: need at least 2 records for non-empty calibration and test parts, got " +
                                std::to_string(dataset_size));
}

std::size_t calibration_size(std::size_t total, double ratio) {
  const auto n = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total) + 0.5));
  return std::clamp<std::size_t>(n, 1, total - 1);
}

SplitIndices split_indices(std::size_t total, const SplitPlan& plan, int repetition_index) {
  plan.validate(total);
  if (repetition_index < 0 || repetition_index >= plan.repetitions)
    throw std::invalid_argument("split: repetition index out of range");

  std::vector<std::size_t> perm(total);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(plan.seed, static_cast<std::uint64_t>(repetition_index)));
  for (std::size_t i = total - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

  const std::size_t n_cal = calibration_size(total, plan.calibration_ratio);
  SplitIndices out;
  out.calibration.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_cal));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_cal), perm.end());
  std::sort(out.calibration.begin(), out.calibration.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace groundrisk
