// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "groundrisk/cascade.hpp"
#include "groundrisk/density.hpp"
#include "groundrisk/metrics.hpp"
#include "groundrisk/risk.hpp"
#include "groundrisk/synthgen.hpp"
#include "groundrisk/uq.hpp"
#include "groundrisk/util.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace groundrisk;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& name, double limit_seconds, const std::function<Verdict()>& body) {
  const auto start = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_seconds > 0 && seconds > limit_seconds) {
    v.pass = false;
    v.detail += " (over time limit " + format_double(limit_seconds) + " s)";
  }
  if (!v.pass) ++failures;
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.2fs", seconds);
  std::printf("[%s] %d %s: %s [%s]\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(), timing);
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Verdict clopper_pearson() {
  Rng rng(derive_seed(1, "cp"));
  const double deltas[] = {0.01, 0.05, 0.1};
  double worst_dual = 0.0, worst_closed = 0.0;
  int zero_cases = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(200);
    // Bias towards small X, where the bound is most used, while covering X = n.
    const std::size_t x = rng.bernoulli(0.25) ? 0 : rng.below(n + 1);
    const double delta = deltas[rng.below(3)];
    const double r = cp_upper_bound(x, n, delta);
    if (x == n) {
      if (r != 1.0) return {false, "X=n should give 1"};
      continue;
    }
    worst_dual = std::max(worst_dual, std::abs(static_cast<double>(oracle::binomial_cdf(n, x, r)) - delta));
    if (x == 0) {
      ++zero_cases;
      worst_closed = std::max(worst_closed, std::abs(r - (1.0 - std::pow(delta, 1.0 / static_cast<double>(n)))));
    }
  }
  return {worst_dual <= 1e-8 && worst_closed <= 1e-10,
          "max |tail - delta| = " + fmt(worst_dual) + " (tol 1e-08), max X=0 error = " + fmt(worst_closed) +
              " over " + std::to_string(zero_cases) + " cases (tol 1e-10)"};
}

Verdict threshold_search() {
  Rng rng(derive_seed(2, "search"));
  int infeasible = 0, mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(200);
    const double p_err = rng.uniform(0.0, 0.3);
    const int levels = rng.bernoulli(0.5) ? 1 + static_cast<int>(rng.below(30)) : 1 << 30;
    std::vector<double> u(n);
    std::vector<std::uint8_t> e(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double base = rng.uniform01();
      u[i] = std::floor(base * levels) / levels;
      e[i] = rng.bernoulli(std::min(1.0, p_err * (0.5 + base))) ? 1 : 0;
    }
    const double alphas[] = {0.1, 0.2, 0.3, 0.4};
    const double deltas[] = {0.01, 0.05, 0.1};
    const RiskSpec spec{alphas[rng.below(4)], deltas[rng.below(3)]};
    const auto got = calibrate_threshold(u, e, spec);
    const auto want = oracle::brute_force_threshold(u, e, spec.alpha, spec.delta);
    infeasible += !want.has_value();
    if (got.feasible != want.has_value() || (want && *got.threshold != *want)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 200 instances (" +
                               std::to_string(infeasible) + " infeasible)"};
}

Verdict guarantee() {
  SynthConfig config;
  GuaranteeOptions options;
  options.risk = {0.2, 0.05};
  options.trials = 1000;
  const GuaranteeResult g = run_guarantee_trials(config, options);
  const double rate = g.violation_rate();
  return {rate <= 0.071, "alpha=0.2 delta=0.05: " + std::to_string(g.violations) + " violations / " +
                             std::to_string(g.trials) + " trials = " + fmt(rate) + " (limit 0.071), " +
                             std::to_string(g.infeasible) + " infeasible"};
}

Verdict auroc_oracle() {
  Rng rng(derive_seed(4, "auroc"));
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const std::size_t n = 2 + rng.below(299);
    const int levels = 2 + static_cast<int>(rng.below(20));
    std::vector<double> u(n);
    std::vector<std::uint8_t> adm(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double base = rng.uniform01();
      u[i] = rng.bernoulli(0.5) ? std::floor(base * levels) / levels : base;
      adm[i] = rng.bernoulli(1.0 - 0.6 * base) ? 1 : 0;
    }
    const auto pos = std::count(adm.begin(), adm.end(), 0);
    if (pos == 0 || pos == static_cast<long>(n)) continue;
    worst = std::max(worst, std::abs(auroc(u, adm) - oracle::pairwise_auroc(u, adm)));
    ++done;
  }
  return {worst <= 1e-12, "max difference " + fmt(worst) + " over 100 instances (tol 1e-12)"};
}

Verdict region_oracle() {
  Rng rng(derive_seed(5, "regions"));
  int mismatches = 0;
  std::size_t regions_seen = 0;
  for (int t = 0; t < 100; ++t) {
    const int h = 1 + static_cast<int>(rng.below(40));
    const int w = 1 + static_cast<int>(rng.below(40));
    DensityMap m;
    m.grid_h = h;
    m.grid_w = w;
    m.patch_size = 14;
    m.values.assign(static_cast<std::size_t>(h * w), 0.0);
    if (t % 2 == 0) {
      // Count-based densities, as produced from K samples, with many ties.
      const int k = 1 + static_cast<int>(rng.below(60));
      for (int i = 0; i < k; ++i) m.values[rng.below(m.values.size())] += 1.0 / k;
    } else {
      const double fill = rng.uniform(0.1, 0.9);
      for (double& v : m.values) v = rng.bernoulli(fill) ? rng.uniform01() : 0.0;
      m.values[rng.below(m.values.size())] = 1.0;
    }
    const auto got = extract_regions(m, 0.3);
    regions_seen += got.size();
    std::set<std::set<std::size_t>> as_set;
    for (const auto& r : got) as_set.insert(std::set<std::size_t>(r.begin(), r.end()));
    if (as_set.size() != got.size() || as_set != oracle::flood_fill_regions(m.values, h, w, 0.3)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 100 grids (" + std::to_string(regions_seen) +
                               " regions)"};
}

Verdict formulas() {
  const double eps = 1e-8;
  std::string failures_seen;
  for (std::size_t m = 2; m <= 64; ++m) {
    const std::vector<double> p(m, 1.0 / static_cast<double>(m));
    if (concentration_deficit(p) != 1.0 - 1.0 / static_cast<double>(m)) failures_seen += " cd@M=" + std::to_string(m);
    if (std::abs(info_dispersion(p, eps) - 1.0) > 1e-6) failures_seen += " ie@M=" + std::to_string(m);
  }
  Rng rng(derive_seed(6, "ta"));
  for (int t = 0; t < 100; ++t) {
    const double s = rng.uniform(0.05, 0.5);
    const std::vector<double> scores{s, s, rng.uniform(0.0, s)};
    if (std::abs(top_ambiguity(scores, eps) - 1.0) > 1e-6) failures_seen += " ta-tie";
  }
  UqConfig config;
  for (int t = 0; t < 100; ++t) {
    const double s = t == 0 ? 1.0 : rng.uniform(0.01, 1.0);
    RegionSet one;
    one.regions.push_back({{0}, s});
    one.probs.push_back(1.0);
    const auto score = score_regions_uq(one, config);
    if (score.ta != std::max(0.1, 1.0 - s) || score.ie != 0.0 || score.cd != 0.0) failures_seen += " single";
  }
  return {failures_seen.empty(), failures_seen.empty() ? "uniform M=2..64, tied top-two, single region" : failures_seen};
}

struct Discrimination {
  double auroc = 0.0;
  double auarc = 0.0;
  double base = 0.0;
  double pc_auroc = 0.0;
};

Discrimination discrimination_run() {
  const auto records = generate_dataset(SynthConfig{});
  std::vector<double> u(records.size()), pc(records.size());
  std::vector<std::uint8_t> adm(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto s = score_record(records[i], UqConfig{});
    u[i] = s.combined;
    pc[i] = *s.pc;
    adm[i] = admission(select_mlg(records[i], 0), records[i].gt_box);
  }
  Discrimination d;
  d.auroc = auroc(u, adm);
  d.auarc = auarc(u, adm);
  d.base = static_cast<double>(std::count(adm.begin(), adm.end(), 1)) / static_cast<double>(adm.size());
  d.pc_auroc = auroc(pc, adm);
  return d;
}

Verdict discrimination() {
  const Discrimination a = discrimination_run();
  const Discrimination b = discrimination_run();
  const bool same = a.auroc == b.auroc && a.auarc == b.auarc && a.base == b.base;
  return {a.auroc >= 0.75 && a.auarc > a.base && same,
          "AUROC " + fmt(a.auroc) + " (>= 0.75), AUARC " + fmt(a.auarc) + " vs base accuracy " + fmt(a.base) +
              ", pc AUROC " + fmt(a.pc_auroc) + (same ? ", repeat identical" : ", repeat differs")};
}

Verdict cascade_bookkeeping() {
  SynthConfig config;
  config.seed = 8;
  const auto records = generate_dataset(config);
  std::vector<double> u(records.size());
  std::vector<std::uint8_t> primary(records.size()), expert(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    u[i] = score_record(records[i], UqConfig{}).combined;
    primary[i] = admission(select_mlg(records[i], 0), records[i].gt_box);
    expert[i] = admission(*records[i].expert, records[i].gt_box);
  }
  std::vector<double> thresholds{-1.0, 2.0};
  for (double v : u) thresholds.push_back(v);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  int mixture_errors = 0, rate_increases = 0;
  double previous_rate = 2.0;
  for (double tau : thresholds) {
    const auto r = evaluate_cascade(records, u, tau, 0);
    std::size_t correct = 0, deferred = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const bool accept = u[i] <= tau;
      deferred += !accept;
      correct += accept ? primary[i] : expert[i];
    }
    const double n = static_cast<double>(records.size());
    if (r.system_accuracy != static_cast<double>(correct) / n ||
        r.cascading_rate != static_cast<double>(deferred) / n)
      ++mixture_errors;
    if (r.cascading_rate > previous_rate) ++rate_increases;
    previous_rate = r.cascading_rate;
  }
  return {mixture_errors == 0 && rate_increases == 0,
          std::to_string(thresholds.size()) + " thresholds: " + std::to_string(mixture_errors) +
              " mixture mismatches, " + std::to_string(rate_increases) + " rate increases"};
}

std::vector<std::pair<std::string, std::string>> pipeline_outputs(const std::filesystem::path& root) {
  namespace cli = groundrisk::cli;
  std::ostringstream sink;
  cli::SynthOptions synth;
  synth.config.n_records = 400;
  synth.config.seed = 21;
  synth.output = root / "records.jsonl";
  cli::cmd_synth(synth, sink);

  cli::ScoreOptions score;
  score.input = synth.output;
  score.output = root / "scored.jsonl";
  cli::cmd_score(score, sink);

  cli::CalibrateOptions cal;
  cal.input = score.output;
  cal.output_dir = root / "calibration";
  cal.risk = {0.2, 0.05};
  cal.plan.seed = 21;
  cal.plan.repetitions = 5;
  cal.mlg_seed = 21;
  cli::cmd_calibrate(cal, sink);

  cli::EvaluateOptions eval;
  eval.input = score.output;
  eval.calibration = cal.output_dir;
  eval.output_dir = root / "evaluation";
  eval.mlg_seed = 21;
  cli::cmd_evaluate(eval, sink);

  cli::CascadeOptions cascade;
  cascade.input = score.output;
  cascade.calibration = cal.output_dir;
  cascade.output_dir = root / "cascade";
  cascade.mlg_seed = 21;
  cli::cmd_cascade(cascade, sink);

  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files.emplace_back(std::filesystem::relative(entry.path(), root).string(), read_file(entry.path()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Verdict determinism() {
  groundrisk::testing::TempDir first("accept-a"), second("accept-b");
  const auto a = pipeline_outputs(first.path());
  const auto b = pipeline_outputs(second.path());
  std::size_t csvs = 0;
  for (const auto& [name, _] : a) csvs += name.ends_with(".csv");
  if (a.size() != b.size()) return {false, "different file sets"};
  std::string differing;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) differing += " " + a[i].first;
  return {differing.empty() && csvs > 0,
          differing.empty() ? std::to_string(a.size()) + " files (" + std::to_string(csvs) + " CSV) byte-identical"
                            : "differ:" + differing};
}

}  // namespace

int main() {
  report(1, "Clopper-Pearson bound", 10, clopper_pearson);
  report(2, "threshold search vs brute force", 30, threshold_search);
  report(3, "finite-sample FDR guarantee", 300, guarantee);
  report(4, "AUROC vs pairwise oracle", 0, auroc_oracle);
  report(5, "region extraction vs flood fill", 0, region_oracle);
  report(6, "uncertainty formulas", 0, formulas);
  report(7, "pipeline discrimination", 0, discrimination);
  report(8, "cascade bookkeeping", 0, cascade_bookkeeping);
  report(9, "pipeline determinism", 0, determinism);
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
