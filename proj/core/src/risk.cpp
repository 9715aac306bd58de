#include "groundrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "groundrisk/beta.hpp"

namespace groundrisk {
namespace {

void check_inputs(std::span<const double> u, std::span<const std::uint8_t> flags, const char* who) {
  if (u.size() != flags.size())
    throw std::invalid_argument(std::string(who) + ": uncertainties and flags differ in length (" +
                                std::to_string(u.size()) + " vs " + std::to_string(flags.size()) + ")");
  for (std::uint8_t f : flags)
    if (f > 1) throw std::invalid_argument(std::string(who) + ": flags must be 0 or 1");
}

}  // namespace

void RiskSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("risk: alpha must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("risk: delta must lie in (0, 1)");
}

double cp_upper_bound(std::size_t errors, std::size_t accepted, double delta) {
  if (accepted == 0) throw std::invalid_argument("cp_upper_bound: accepted count must be >= 1");
  if (errors > accepted) throw std::invalid_argument("cp_upper_bound: errors exceed accepted count");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("cp_upper_bound: delta must lie in (0, 1)");
  if (errors == accepted) return 1.0;
  return beta_quantile(1.0 - delta, static_cast<double>(errors) + 1.0,
                       static_cast<double>(accepted - errors));
}

double empirical_fdr(std::span<const double> u, std::span<const std::uint8_t> errors, double tau) {
  check_inputs(u, errors, "empirical_fdr");
  std::size_t accepted = 0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] <= tau) {
      ++accepted;
      wrong += errors[i];
    }
  }
  return accepted == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(accepted);
}

CalibrationOutcome calibrate_threshold(std::span<const double> u, std::span<const std::uint8_t> errors,
                                       const RiskSpec& spec) {
  check_inputs(u, errors, "calibrate_threshold");
  spec.validate();
  if (u.empty()) throw std::invalid_argument("calibrate_threshold: need at least one calibration point");
  for (double v : u)
    if (!std::isfinite(v)) throw std::invalid_argument("calibrate_threshold: non-finite uncertainty");

  std::vector<std::size_t> order(u.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });

  CalibrationOutcome out;
  std::size_t accepted = 0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double tau = u[order[i]];
    // Tied values are accepted together.
    while (i < order.size() && u[order[i]] == tau) {
      ++accepted;
      wrong += errors[order[i]];
      ++i;
    }
    const double bound = cp_upper_bound(wrong, accepted, spec.delta);
    out.trace.push_back({tau, accepted, wrong, bound});
    if (bound <= spec.alpha) out.threshold = tau;
  }
  out.feasible = out.threshold.has_value();
  return out;
}

}  // namespace groundrisk
