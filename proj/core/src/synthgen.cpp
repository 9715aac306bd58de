#include "groundrisk/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "groundrisk/metrics.hpp"
#include "groundrisk/util.hpp"

namespace groundrisk {
namespace {

constexpr double kEasySpread = 0.3;  // easy clouds span +-30% of the box extent
constexpr double kModeJitter = 10.0;  // pixels around each hard-record mode

std::string record_id(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "synth-" + digits;
}

Point clamp_to_image(Point p, int w, int h) {
  return {std::clamp(p.x, 0.0, static_cast<double>(w - 1)), std::clamp(p.y, 0.0, static_cast<double>(h - 1))};
}

Point round_point(Point p) { return {std::round(p.x), std::round(p.y)}; }

Point point_outside(const Box& box, const SynthConfig& c, Rng& rng) {
  for (;;) {
    Point p{std::floor(rng.uniform(0.0, c.image_width)), std::floor(rng.uniform(0.0, c.image_height))};
    if (!admission(p, box)) return p;
  }
}

GroundingRecord make_record(const SynthConfig& c, std::size_t index) {
  Rng rng(derive_seed(c.seed, static_cast<std::uint64_t>(index)));

  GroundingRecord r;
  r.id = record_id(index);
  r.image_width = c.image_width;
  r.image_height = c.image_height;
  r.instruction = "click target " + std::to_string(index);

  const double x0 = std::floor(rng.uniform(0.0, c.image_width - c.box_width + 1.0));
  const double y0 = std::floor(rng.uniform(0.0, c.image_height - c.box_height + 1.0));
  r.gt_box = {x0, y0, x0 + c.box_width, y0 + c.box_height};
  const Point center{x0 + 0.5 * c.box_width, y0 + 0.5 * c.box_height};

  const bool easy = rng.bernoulli(c.easy_fraction);
  r.samples.reserve(static_cast<std::size_t>(c.k_samples));
  if (easy) {
    const double rx = kEasySpread * c.box_width;
    const double ry = kEasySpread * c.box_height;
    for (int k = 0; k < c.k_samples; ++k)
      r.samples.push_back(round_point({center.x + rng.uniform(-rx, rx), center.y + rng.uniform(-ry, ry)}));
  } else {
    const std::size_t modes = 2 + rng.below(2);
    std::vector<Point> centers;
    std::vector<double> weights;
    for (std::size_t m = 0; m < modes; ++m) {
      Point mc;
      if (m == 0 && rng.bernoulli(0.5))
        mc = {rng.uniform(r.gt_box.x_min, r.gt_box.x_max), rng.uniform(r.gt_box.y_min, r.gt_box.y_max)};
      else
        mc = {center.x + rng.uniform(-c.dispersion, c.dispersion),
              center.y + rng.uniform(-c.dispersion, c.dispersion)};
      centers.push_back(clamp_to_image(mc, c.image_width, c.image_height));
      weights.push_back(0.2 + rng.uniform01());
    }
    double total = 0.0;
    for (double w : weights) total += w;
    for (int k = 0; k < c.k_samples; ++k) {
      double pick = rng.uniform01() * total;
      std::size_t m = 0;
      while (m + 1 < modes && pick >= weights[m]) pick -= weights[m++];
      const Point p{centers[m].x + rng.uniform(-kModeJitter, kModeJitter),
                    centers[m].y + rng.uniform(-kModeJitter, kModeJitter)};
      r.samples.push_back(round_point(clamp_to_image(p, c.image_width, c.image_height)));
    }
  }

  r.mlg = r.samples[rng.below(r.samples.size())];
  const bool primary_ok = admission(*r.mlg, r.gt_box);

  if (rng.bernoulli(c.expert_accuracy))
    r.expert = Point{std::floor(rng.uniform(r.gt_box.x_min, r.gt_box.x_max)),
                     std::floor(rng.uniform(r.gt_box.y_min, r.gt_box.y_max))};
  else
    r.expert = point_outside(r.gt_box, c, rng);

  // Weakly informative token-confidence stand-in.
  r.pc = std::clamp(0.3 + (primary_ok ? 0.0 : 0.05) + 0.4 * (rng.uniform01() - 0.5), 0.0, 1.0);
  return r;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_records < 1) throw std::invalid_argument("synth: n_records must be positive");
  if (k_samples < 1) throw std::invalid_argument("synth: k_samples must be positive");
  if (image_width < 1 || image_height < 1) throw std::invalid_argument("synth: image size must be positive");
  if (box_width < 1 || box_height < 1) throw std::invalid_argument("synth: box size must be positive");
  if (box_width > image_width || box_height > image_height)
    throw std::invalid_argument("synth: box must fit inside the image");
  if (!(easy_fraction >= 0.0 && easy_fraction <= 1.0))
    throw std::invalid_argument("synth: easy_fraction must lie in [0, 1]");
  if (!(expert_accuracy >= 0.0 && expert_accuracy <= 1.0))
    throw std::invalid_argument("synth: expert_accuracy must lie in [0, 1]");
  if (!(dispersion > 0.0)) throw std::invalid_argument("synth: dispersion must be positive");
  if (expert_accuracy < 1.0 && box_width == image_width && box_height == image_height)
    throw std::invalid_argument("synth: no room outside the box for a wrong expert prediction");
}

std::vector<GroundingRecord> generate_dataset(const SynthConfig& config) {
  config.validate();
  std::vector<GroundingRecord> out;
  out.reserve(config.n_records);
  for (std::size_t i = 0; i < config.n_records; ++i) out.push_back(make_record(config, i));
  return out;
}

double GuaranteeResult::violation_rate() const {
  return trials == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(trials);
}

double GuaranteeResult::conditional_violation_rate() const {
  const std::size_t feasible = trials - infeasible;
  return feasible == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(feasible);
}

TrialOutcome run_trial(std::span<const GroundingRecord> records, const GuaranteeOptions& options,
                       std::uint64_t split_seed, std::uint64_t mlg_seed) {
  std::vector<double> u(records.size());
  std::vector<std::uint8_t> adm(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    u[i] = variant_value(score_record(records[i], options.uq), options.variant);
    adm[i] = admission(select_mlg(records[i], mlg_seed), records[i].gt_box);
  }

  const SplitPlan plan{options.calibration_ratio, split_seed, 1};
  const SplitIndices idx = split_indices(records.size(), plan, 0);
  std::vector<double> cal_u;
  std::vector<std::uint8_t> cal_err;
  for (std::size_t i : idx.calibration) {
    cal_u.push_back(u[i]);
    cal_err.push_back(static_cast<std::uint8_t>(1 - adm[i]));
  }
  std::vector<double> test_u;
  std::vector<std::uint8_t> test_adm;
  for (std::size_t i : idx.test) {
    test_u.push_back(u[i]);
    test_adm.push_back(adm[i]);
  }

  const CalibrationOutcome cal = calibrate_threshold(cal_u, cal_err, options.risk);
  TrialOutcome out;
  out.feasible = cal.feasible;
  if (cal.feasible) {
    const double tau = *cal.threshold;
    out.threshold = tau;
    for (const TraceRow& row : cal.trace)
      if (row.tau == tau) out.calibration_bound = row.bound;
    out.test_fdr = fdr_at(test_u, test_adm, tau);
    out.test_accepted =
        static_cast<std::size_t>(std::count_if(test_u.begin(), test_u.end(), [tau](double v) { return v <= tau; }));
  }
  return out;
}

GuaranteeResult run_guarantee_trials(const SynthConfig& config, const GuaranteeOptions& options) {
  config.validate();
  options.risk.validate();
  options.uq.validate();
  if (options.trials < 1) throw std::invalid_argument("guarantee: trials must be >= 1");

  GuaranteeResult result;
  result.trials = options.trials;
  result.alpha = options.risk.alpha;
  result.delta = options.risk.delta;
  result.outcomes.resize(options.trials);

  parallel_for(
      options.trials,
      [&](std::size_t t) {
        SynthConfig trial_config = config;
        trial_config.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
        const auto records = generate_dataset(trial_config);
        result.outcomes[t] =
            run_trial(records, options, derive_seed(trial_config.seed, "split"), trial_config.seed);
      },
      options.threads);

  for (const TrialOutcome& o : result.outcomes) {
    if (!o.feasible)
      ++result.infeasible;
    else if (o.test_fdr > options.risk.alpha)
      ++result.violations;
  }
  return result;
}

}  // namespace groundrisk
