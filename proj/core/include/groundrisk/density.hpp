#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "groundrisk/records.hpp"

namespace groundrisk {

/// Normalized per-patch sample frequencies on a ceil-divided screen grid.
/// Values are stored row-major: index = row * grid_w + col.
struct DensityMap {
  int grid_h = 0;
  int grid_w = 0;
  int patch_size = 0;
  std::vector<double> values;

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * grid_w + col]; }
  std::size_t cell_count() const { return values.size(); }
};

/// Builds the density map for `samples` on an image of the given size.
/// Out-of-image samples are clamped to the nearest edge patch, so every
/// sample is counted. Throws std::invalid_argument on empty input,
/// non-finite coordinates, or non-positive sizes.
DensityMap build_density_map(std::span<const Point> samples, int image_width, int image_height,
                             int patch_size);

/// Row-major patch indices of one connected region, ascending.
using Region = std::vector<std::size_t>;

/// Keeps patches with density strictly above beta * max and groups them into
/// maximal 4-connected components. Regions come back ordered by their
/// smallest patch index. Throws std::invalid_argument for an all-zero map or
/// beta outside [0, 1).
std::vector<Region> extract_regions(const DensityMap& map, double beta);

struct ScoredRegion {
  Region patches;
  double score = 0.0;  // mean density over the region's patches
};

/// Regions ranked by score (descending; ties by smallest patch index) and
/// the categorical distribution induced by normalizing their scores.
struct RegionSet {
  std::vector<ScoredRegion> regions;
  std::vector<double> probs;

  std::size_t size() const { return regions.size(); }
  std::vector<double> scores() const;
};

RegionSet score_regions(const DensityMap& map, std::vector<Region> regions);

/// grid_h lines of grid_w comma-separated values.
std::string density_csv(const DensityMap& map);

}  // namespace groundrisk
