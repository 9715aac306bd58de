#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "groundrisk/density.hpp"
#include "groundrisk/records.hpp"

namespace groundrisk {

/// Weights of the combined score, in (cd, ie, ta) order.
struct UqWeights {
  double cd = 0.6;
  double ie = 0.2;
  double ta = 0.2;
  friend bool operator==(const UqWeights&, const UqWeights&) = default;
};

struct WeightPreset {
  std::string_view name;
  UqWeights weights;
};

/// The sensitivity-sweep weightings v1..v6 plus "original".
std::span<const WeightPreset> weight_presets();
UqWeights weight_preset(std::string_view name);

struct UqConfig {
  /// Only the first k_samples samples of a record are used; records with
  /// fewer samples use all of them.
  int k_samples = 10;
  int patch_size = 14;
  double beta = 0.3;
  double epsilon = 1e-8;
  UqWeights weights;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct UncertaintyScore {
  double ta = 0.0;
  double ie = 0.0;
  double cd = 0.0;
  double combined = 0.0;
  std::optional<double> pc;
};

/// Margin between the two leading region scores. `sorted_scores` must be
/// non-empty and descending.
double top_ambiguity(std::span<const double> sorted_scores, double epsilon);

/// Normalized entropy of the region distribution; 0 for a single region.
double info_dispersion(std::span<const double> probs, double epsilon);

double concentration_deficit(std::span<const double> probs);

struct Components {
  double cd = 0.0;
  double ie = 0.0;
  double ta = 0.0;
};

double combine(const Components& components, const UqWeights& weights);

/// Components and combination for an already extracted region set.
UncertaintyScore score_regions_uq(const RegionSet& regions, const UqConfig& config);

/// density map -> regions -> ranked scores -> components -> combination.
UncertaintyScore score_record(const GroundingRecord& record, const UqConfig& config);

enum class UqVariant { Com, Ta, Ie, Cd, Pc };

UqVariant parse_variant(std::string_view name);
std::string_view to_string(UqVariant variant);

/// The uncertainty value a variant selects. Throws std::invalid_argument for
/// Pc when the score carries no pc.
double variant_value(const UncertaintyScore& score, UqVariant variant);

/// Same, reading the persisted fields of a scored record. Throws RecordError
/// naming the missing field.
double variant_value(const GroundingRecord& record, UqVariant variant);

StoredUncertainty to_stored(const UncertaintyScore& score);

}  // namespace groundrisk
