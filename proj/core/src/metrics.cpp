#include "groundrisk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace groundrisk {
namespace {

void check_inputs(std::span<const double> u, std::span<const std::uint8_t> adm, const char* who) {
  if (u.size() != adm.size())
    throw std::invalid_argument(std::string(who) + ": uncertainties and flags differ in length");
  for (std::uint8_t a : adm)
    if (a > 1) throw std::invalid_argument(std::string(who) + ": flags must be 0 or 1");
}

std::vector<std::size_t> ascending_order(std::span<const double> u) {
  std::vector<std::size_t> order(u.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
  return order;
}

}  // namespace

bool admission(Point p, const Box& b) {
  return b.x_min <= p.x && p.x <= b.x_max && b.y_min <= p.y && p.y <= b.y_max;
}

double auroc(std::span<const double> u, std::span<const std::uint8_t> adm) {
  check_inputs(u, adm, "auroc");
  const std::size_t n_pos = static_cast<std::size_t>(std::count(adm.begin(), adm.end(), 0));
  const std::size_t n_neg = adm.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::domain_error("auroc: undefined unless both admissible and inadmissible instances exist");

  // Mid-ranks of the inadmissible ("positive") group.
  const auto order = ascending_order(u);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && u[order[j]] == u[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (adm[order[k]] == 0) rank_sum += mid_rank;
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double mann_whitney = rank_sum - np * (np + 1.0) / 2.0;
  return mann_whitney / (np * static_cast<double>(n_neg));
}

double auarc(std::span<const double> u, std::span<const std::uint8_t> adm) {
  check_inputs(u, adm, "auarc");
  if (u.empty()) throw std::invalid_argument("auarc: empty input");
  double total = 0.0;
  for (const ArcPoint& p : arc_curve(u, adm)) total += p.accuracy;
  return total / static_cast<double>(u.size());
}

std::vector<ArcPoint> arc_curve(std::span<const double> u, std::span<const std::uint8_t> adm) {
  check_inputs(u, adm, "arc_curve");
  const std::size_t n = u.size();
  const auto order = ascending_order(u);
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + adm[order[i]];

  std::vector<ArcPoint> curve;
  curve.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t kept = n - j;
    curve.push_back({static_cast<double>(j) / static_cast<double>(n),
                     static_cast<double>(prefix[kept]) / static_cast<double>(kept)});
  }
  return curve;
}

double fdr_at(std::span<const double> u, std::span<const std::uint8_t> adm, double tau) {
  check_inputs(u, adm, "fdr_at");
  std::size_t accepted = 0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] <= tau) {
      ++accepted;
      wrong += 1 - adm[i];
    }
  }
  return accepted == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(accepted);
}

double power_at(std::span<const double> u, std::span<const std::uint8_t> adm, double tau) {
  check_inputs(u, adm, "power_at");
  std::size_t correct = 0;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    correct += adm[i];
    if (adm[i] && u[i] <= tau) ++kept;
  }
  if (correct == 0) throw std::domain_error("power_at: no admissible instance");
  return static_cast<double>(kept) / static_cast<double>(correct);
}

std::vector<RocPoint> roc_curve(std::span<const double> u, std::span<const std::uint8_t> adm) {
  check_inputs(u, adm, "roc_curve");
  const std::size_t n_pos = static_cast<std::size_t>(std::count(adm.begin(), adm.end(), 0));
  const std::size_t n_neg = adm.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::domain_error("roc_curve: undefined unless both classes are present");

  auto order = ascending_order(u);
  std::reverse(order.begin(), order.end());
  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double value = u[order[i]];
    while (i < order.size() && u[order[i]] == value) {
      if (adm[order[i]] == 0)
        ++tp;
      else
        ++fp;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                     static_cast<double>(tp) / static_cast<double>(n_pos)});
  }
  return curve;
}

EvalReport evaluate(std::span<const double> u, std::span<const std::uint8_t> adm, double tau) {
  check_inputs(u, adm, "evaluate");
  EvalReport r;
  r.n_total = u.size();
  r.n_accepted = static_cast<std::size_t>(std::count_if(u.begin(), u.end(), [tau](double v) { return v <= tau; }));
  const auto n_adm = static_cast<std::size_t>(std::count(adm.begin(), adm.end(), 1));
  if (n_adm > 0 && n_adm < adm.size()) r.auroc = auroc(u, adm);
  r.auarc = u.empty() ? 0.0 : auarc(u, adm);
  r.fdr = fdr_at(u, adm, tau);
  if (n_adm > 0) r.power = power_at(u, adm, tau);
  return r;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

}  // namespace groundrisk
