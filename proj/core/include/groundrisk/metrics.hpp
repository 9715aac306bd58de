#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "groundrisk/records.hpp"

namespace groundrisk {

/// Boundary-inclusive point-in-box test.
bool admission(Point point, const Box& box);

/// Rank-based (Mann-Whitney) probability that an inadmissible instance has
/// higher uncertainty than an admissible one, ties counting one half.
/// Throws std::domain_error unless both classes are present.
double auroc(std::span<const double> uncertainties, std::span<const std::uint8_t> admissible);

/// Mean accuracy of the retained set over rejection levels j = 0..N-1, where
/// level j drops the j most uncertain instances (ties by index).
double auarc(std::span<const double> uncertainties, std::span<const std::uint8_t> admissible);

double fdr_at(std::span<const double> uncertainties, std::span<const std::uint8_t> admissible,
              double tau);

/// Throws std::domain_error when no instance is admissible.
double power_at(std::span<const double> uncertainties, std::span<const std::uint8_t> admissible,
                double tau);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// ROC for detecting inadmissible instances by thresholding uncertainty from
/// high to low. Starts at (0,0) and ends at (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> uncertainties,
                                std::span<const std::uint8_t> admissible);

struct ArcPoint {
  double rejection_rate = 0.0;
  double accuracy = 0.0;
};

std::vector<ArcPoint> arc_curve(std::span<const double> uncertainties,
                                std::span<const std::uint8_t> admissible);

struct EvalReport {
  std::optional<double> auroc;  // absent when only one class is present
  double auarc = 0.0;
  double fdr = 0.0;
  std::optional<double> power;  // absent when nothing is admissible
  std::size_t n_accepted = 0;
  std::size_t n_total = 0;
};

/// All four metrics at threshold `tau`.
EvalReport evaluate(std::span<const double> uncertainties, std::span<const std::uint8_t> admissible,
                    double tau);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population form
};

MeanStd mean_std(std::span<const double> values);

}  // namespace groundrisk
