#include "groundrisk/density.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "groundrisk/util.hpp"

namespace groundrisk {

DensityMap build_density_map(std::span<const Point> samples, int image_width, int image_height,
                             int patch_size) {
  if (samples.empty()) throw std::invalid_argument("density: at least one sample is required");
  if (patch_size < 1) throw std::invalid_argument("density: patch_size must be >= 1");
  if (image_width < 1 || image_height < 1)
    throw std::invalid_argument("density: image dimensions must be positive");

  DensityMap map;
  map.patch_size = patch_size;
  map.grid_w = (image_width + patch_size - 1) / patch_size;
  map.grid_h = (image_height + patch_size - 1) / patch_size;
  map.values.assign(static_cast<std::size_t>(map.grid_w) * map.grid_h, 0.0);

  auto cell = [patch_size](double coord, int cells) {
    const double idx = std::floor(coord / patch_size);
    return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(cells - 1)));
  };

  for (const Point& p : samples) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("density: non-finite sample coordinate");
    const int col = cell(p.x, map.grid_w);
    const int row = cell(p.y, map.grid_h);
    map.values[static_cast<std::size_t>(row) * map.grid_w + col] += 1.0;
  }
  const double total = static_cast<double>(samples.size());
  for (double& v : map.values) v /= total;
  return map;
}

std::vector<Region> extract_regions(const DensityMap& map, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("regions: beta must lie in [0, 1)");
  const double p_max =
      map.values.empty() ? 0.0 : *std::max_element(map.values.begin(), map.values.end());
  if (!(p_max > 0.0)) throw std::invalid_argument("regions: density map has no mass");

  const double cutoff = beta * p_max;
  const std::size_t w = static_cast<std::size_t>(map.grid_w);
  const std::size_t n = map.values.size();
  std::vector<char> active(n, 0);
  for (std::size_t i = 0; i < n; ++i) active[i] = map.values[i] > cutoff;

  std::vector<Region> regions;
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> frontier;
  for (std::size_t start = 0; start < n; ++start) {
    if (!active[start] || seen[start]) continue;
    Region region;
    seen[start] = 1;
    frontier.push(start);
    while (!frontier.empty()) {
      const std::size_t cur = frontier.front();
      frontier.pop();
      region.push_back(cur);
      const std::size_t row = cur / w;
      const std::size_t col = cur % w;
      auto visit = [&](std::size_t next) {
        if (active[next] && !seen[next]) {
          seen[next] = 1;
          frontier.push(next);
        }
      };
      if (row > 0) visit(cur - w);
      if (row + 1 < static_cast<std::size_t>(map.grid_h)) visit(cur + w);
      if (col > 0) visit(cur - 1);
      if (col + 1 < w) visit(cur + 1);
    }
    std::sort(region.begin(), region.end());
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<double> RegionSet::scores() const {
  std::vector<double> out;
  out.reserve(regions.size());
  for (const auto& r : regions) out.push_back(r.score);
  return out;
}

RegionSet score_regions(const DensityMap& map, std::vector<Region> regions) {
  if (regions.empty()) throw std::invalid_argument("regions: no region to score");

  RegionSet set;
  set.regions.reserve(regions.size());
  for (Region& region : regions) {
    if (region.empty()) throw std::invalid_argument("regions: empty region");
    std::sort(region.begin(), region.end());
    double sum = 0.0;
    for (std::size_t idx : region) {
      if (idx >= map.values.size()) throw std::out_of_range("regions: patch index outside the grid");
      sum += map.values[idx];
    }
    const double score = sum / static_cast<double>(region.size());
    set.regions.push_back({std::move(region), score});
  }

  std::sort(set.regions.begin(), set.regions.end(), [](const ScoredRegion& a, const ScoredRegion& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.patches.front() < b.patches.front();
  });

  double total = 0.0;
  for (const auto& r : set.regions) total += r.score;
  set.probs.reserve(set.regions.size());
  for (const auto& r : set.regions) set.probs.push_back(r.score / total);
  return set;
}

std::string density_csv(const DensityMap& map) {
  std::string out;
  for (int row = 0; row < map.grid_h; ++row) {
    for (int col = 0; col < map.grid_w; ++col) {
      if (col > 0) out += ',';
      out += format_double(map.at(row, col));
    }
    out += '\n';
  }
  return out;
}

}  // namespace groundrisk
