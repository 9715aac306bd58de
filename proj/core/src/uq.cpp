#include "groundrisk/uq.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace groundrisk {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

constexpr std::array<WeightPreset, 7> kPresets{{
    {"original", {0.6, 0.2, 0.2}},
    {"v1", {0.34, 0.33, 0.33}},
    {"v2", {0.2, 0.2, 0.6}},
    {"v3", {0.2, 0.6, 0.2}},
    {"v4", {0.5, 0.25, 0.25}},
    {"v5", {0.25, 0.25, 0.5}},
    {"v6", {0.25, 0.5, 0.25}},
}};

}  // namespace

std::span<const WeightPreset> weight_presets() { return kPresets; }

UqWeights weight_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return p.weights;
  throw std::invalid_argument("unknown weight preset '" + std::string(name) +
                              "' (expected original or v1..v6)");
}

void UqConfig::validate() const {
  if (k_samples < 1) throw std::invalid_argument("uq: k_samples must be >= 1");
  if (patch_size < 1) throw std::invalid_argument("uq: patch_size must be >= 1");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("uq: beta must lie in [0, 1)");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("uq: epsilon must be positive");
  if (weights.cd < 0 || weights.ie < 0 || weights.ta < 0)
    throw std::invalid_argument("uq: weights must be non-negative");
  if (std::abs(weights.cd + weights.ie + weights.ta - 1.0) > 1e-12)
    throw std::invalid_argument("uq: weights must sum to 1");
}

double top_ambiguity(std::span<const double> s, double epsilon) {
  if (s.empty()) throw std::invalid_argument("top_ambiguity: no region scores");
  if (s.size() == 1) return clamp01(std::max(0.1, 1.0 - s[0]));
  return clamp01(1.0 - (s[0] - s[1]) / (s[0] + epsilon));
}

double info_dispersion(std::span<const double> probs, double epsilon) {
  if (probs.empty()) throw std::invalid_argument("info_dispersion: empty distribution");
  if (probs.size() == 1) return 0.0;
  double h = 0.0;
  for (double p : probs) h -= p * std::log(p + epsilon);
  return clamp01(h / std::log(static_cast<double>(probs.size())));
}

double concentration_deficit(std::span<const double> probs) {
  if (probs.empty()) throw std::invalid_argument("concentration_deficit: empty distribution");
  // Compensated sum of squares (error-free products and TwoSum), so that
  // uniform inputs give 1 - 1/M to the last bit.
  double hi = 0.0;
  double lo = 0.0;
  for (double p : probs) {
    const double sq = p * p;
    const double sq_err = std::fma(p, p, -sq);
    const double sum = hi + sq;
    const double bv = sum - hi;
    lo += (hi - (sum - bv)) + (sq - bv) + sq_err;
    hi = sum;
  }
  return clamp01(1.0 - (hi + lo));
}

double combine(const Components& c, const UqWeights& w) {
  return w.cd * c.cd + w.ie * c.ie + w.ta * c.ta;
}

UncertaintyScore score_regions_uq(const RegionSet& regions, const UqConfig& config) {
  const std::vector<double> scores = regions.scores();
  UncertaintyScore out;
  out.ta = top_ambiguity(scores, config.epsilon);
  out.ie = info_dispersion(regions.probs, config.epsilon);
  out.cd = concentration_deficit(regions.probs);
  out.combined = combine({out.cd, out.ie, out.ta}, config.weights);
  return out;
}

UncertaintyScore score_record(const GroundingRecord& record, const UqConfig& config) {
  config.validate();
  const std::size_t k = std::min(record.samples.size(), static_cast<std::size_t>(config.k_samples));
  const std::span<const Point> samples(record.samples.data(), k);

  const DensityMap map =
      build_density_map(samples, record.image_width, record.image_height, config.patch_size);
  const RegionSet regions = score_regions(map, extract_regions(map, config.beta));
  UncertaintyScore out = score_regions_uq(regions, config);
  out.pc = record.pc;
  return out;
}

UqVariant parse_variant(std::string_view name) {
  if (name == "com") return UqVariant::Com;
  if (name == "ta") return UqVariant::Ta;
  if (name == "ie") return UqVariant::Ie;
  if (name == "cd") return UqVariant::Cd;
  if (name == "pc") return UqVariant::Pc;
  throw std::invalid_argument("unknown uncertainty variant '" + std::string(name) +
                              "' (expected com, ta, ie, cd or pc)");
}

std::string_view to_string(UqVariant variant) {
  switch (variant) {
    case UqVariant::Com: return "com";
    case UqVariant::Ta: return "ta";
    case UqVariant::Ie: return "ie";
    case UqVariant::Cd: return "cd";
    case UqVariant::Pc: return "pc";
  }
  return "com";
}

double variant_value(const UncertaintyScore& s, UqVariant variant) {
  switch (variant) {
    case UqVariant::Com: return s.combined;
    case UqVariant::Ta: return s.ta;
    case UqVariant::Ie: return s.ie;
    case UqVariant::Cd: return s.cd;
    case UqVariant::Pc:
      if (!s.pc) throw std::invalid_argument("variant pc requested but the score has no pc");
      return *s.pc;
  }
  return s.combined;
}

double variant_value(const GroundingRecord& r, UqVariant variant) {
  if (variant == UqVariant::Pc) {
    if (!r.pc) throw RecordError(0, "pc", "record '" + r.id + "' has no pc field");
    return *r.pc;
  }
  if (!r.uq) throw RecordError(0, "uq", "record '" + r.id + "' is not scored");
  switch (variant) {
    case UqVariant::Ta: return r.uq->ta;
    case UqVariant::Ie: return r.uq->ie;
    case UqVariant::Cd: return r.uq->cd;
    default: return r.uq->com;
  }
}

StoredUncertainty to_stored(const UncertaintyScore& s) { return {s.ta, s.ie, s.cd, s.combined}; }

}  // namespace groundrisk
