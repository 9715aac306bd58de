#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "groundrisk/artifacts.hpp"
#include "groundrisk/cascade.hpp"
#include "groundrisk/density.hpp"
#include "groundrisk/metrics.hpp"
#include "groundrisk/util.hpp"

namespace groundrisk::cli {
namespace {

using nlohmann::ordered_json;

std::string num(double v) { return format_double(v); }

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string padded(std::size_t index, std::size_t width = 3) {
  std::string s = std::to_string(index);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + '\n';
}

/// Values that would be in a CSV cell are quoted only when needed.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

ordered_json mean_std_json(std::span<const double> values) {
  const MeanStd ms = mean_std(values);
  return {{"mean", ms.mean}, {"std", ms.stddev}};
}

std::vector<std::uint8_t> admissibility(std::span<const GroundingRecord> records, std::uint64_t seed) {
  std::vector<std::uint8_t> adm(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    adm[i] = admission(select_mlg(records[i], seed), records[i].gt_box);
  return adm;
}

std::string in_file(const std::string& message, const fs::path& path) {
  return message + " (in " + path.string() + ")";
}

std::vector<double> uncertainties(std::span<const GroundingRecord> records, UqVariant variant, const fs::path& path) {
  std::vector<double> u(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      u[i] = variant_value(records[i], variant);
    } catch (const RecordError& e) {
      throw RecordError(i + 1, e.field(), in_file(e.message(), path));
    }
  }
  return u;
}

template <typename T>
std::vector<T> gather(std::span<const T> values, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(values[i]);
  return out;
}

double effective_tau(const std::optional<double>& threshold) {
  return threshold ? *threshold : -std::numeric_limits<double>::infinity();
}

SplitIndices test_split_for(const CalibrationArtifact& artifact, std::size_t total) {
  if (!artifact.split) {
    SplitIndices all;
    for (std::size_t i = 0; i < total; ++i) all.test.push_back(i);
    return all;
  }
  const SplitPlan plan{artifact.split->calibration_ratio, artifact.split->seed, artifact.split->repetitions};
  return split_indices(total, plan, artifact.split->repetition_index);
}

UqVariant resolve_variant(const std::optional<UqVariant>& requested, const CalibrationArtifact& artifact) {
  if (requested && *requested != artifact.variant)
    throw std::invalid_argument("requested variant " + std::string(to_string(*requested)) +
                                " does not match the calibration artifact's " +
                                std::string(to_string(artifact.variant)));
  return artifact.variant;
}

CalibrationArtifact load_artifact(const fs::path& path) {
  try {
    return calibration_artifact_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string unattainable_message(double alpha) {
  return "The target risk level alpha=" + num(alpha) + " is unattainable under calibration.";
}

std::vector<GroundingRecord> load_records(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return parse_records(in);
  } catch (const RecordError& e) {
    throw RecordError(e.line(), e.field(), in_file(e.message(), path));
  }
}

std::vector<fs::path> calibration_files(const fs::path& path) {
  if (!fs::is_directory(path)) {
    if (!fs::exists(path)) throw std::runtime_error("calibration artifact not found: " + path.string());
    return {path};
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("calibration_") && name.ends_with(".json"))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no calibration_*.json artifacts in " + path.string());
  return files;
}

// --- score -----------------------------------------------------------------

int cmd_score(const ScoreOptions& o, std::ostream& out) {
  o.uq.validate();
  std::vector<GroundingRecord> records = load_records(o.input);
  std::vector<std::string> density(o.density_dir ? records.size() : 0);

  parallel_for(
      records.size(),
      [&](std::size_t i) {
        attach_score(records[i], score_record(records[i], o.uq));
        if (o.density_dir) {
          const auto& r = records[i];
          const std::size_t k = std::min(r.samples.size(), static_cast<std::size_t>(o.uq.k_samples));
          density[i] = density_csv(build_density_map(std::span(r.samples.data(), k), r.image_width,
                                                     r.image_height, o.uq.patch_size));
        }
      },
      o.threads);

  write_file_atomic(o.output, serialize_records(records));
  if (o.density_dir)
    for (std::size_t i = 0; i < records.size(); ++i)
      write_file_atomic(*o.density_dir / (records[i].id + ".csv"), density[i]);

  out << "scored " << records.size() << " records -> " << o.output.string() << '\n';
  return 0;
}

// --- calibrate -------------------------------------------------------------

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out) {
  o.risk.validate();
  const std::vector<GroundingRecord> records = load_records(o.input);
  o.plan.validate(records.size());
  const std::vector<double> u = uncertainties(records, o.variant, o.input);
  const std::vector<std::uint8_t> adm = admissibility(records, o.mlg_seed);

  struct SplitRow {
    CalibrationArtifact artifact;
    double test_fdr = 0.0;
    std::optional<double> test_power;
    std::size_t test_accepted = 0;
    std::size_t test_total = 0;
  };
  const auto reps = static_cast<std::size_t>(o.plan.repetitions);
  std::vector<SplitRow> rows(reps);

  parallel_for(
      reps,
      [&](std::size_t r) {
        const SplitIndices idx = split_indices(records.size(), o.plan, static_cast<int>(r));
        const auto cal_u = gather<double>(u, idx.calibration);
        std::vector<std::uint8_t> cal_err;
        for (std::size_t i : idx.calibration) cal_err.push_back(static_cast<std::uint8_t>(1 - adm[i]));

        SplitRow& row = rows[r];
        row.artifact.risk = o.risk;
        row.artifact.variant = o.variant;
        row.artifact.outcome = calibrate_threshold(cal_u, cal_err, o.risk);
        row.artifact.split = SplitRef{o.plan.calibration_ratio, o.plan.seed, static_cast<int>(r), o.plan.repetitions};

        const auto test_u = gather<double>(u, idx.test);
        const auto test_adm = gather<std::uint8_t>(adm, idx.test);
        const EvalReport report = evaluate(test_u, test_adm, effective_tau(row.artifact.outcome.threshold));
        row.test_fdr = report.fdr;
        row.test_power = report.power;
        row.test_accepted = report.n_accepted;
        row.test_total = report.n_total;
      },
      o.threads);

  std::string csv = join({"split", "feasible", "threshold", "test_fdr", "test_power", "test_accepted", "test_total"});
  std::vector<double> fdrs;
  std::vector<double> powers;
  std::size_t feasible = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const SplitRow& row = rows[r];
    write_file_atomic(o.output_dir / ("calibration_" + padded(r) + ".json"), to_json(row.artifact).dump(2) + "\n");
    feasible += row.artifact.outcome.feasible;
    fdrs.push_back(row.test_fdr);
    if (row.test_power) powers.push_back(*row.test_power);
    csv += join({std::to_string(r), row.artifact.outcome.feasible ? "1" : "0",
                 opt_num(row.artifact.outcome.threshold), num(row.test_fdr), opt_num(row.test_power),
                 std::to_string(row.test_accepted), std::to_string(row.test_total)});
  }
  write_file_atomic(o.output_dir / "summary.csv", csv);

  ordered_json summary;
  summary["alpha"] = o.risk.alpha;
  summary["delta"] = o.risk.delta;
  summary["uq_variant"] = std::string(to_string(o.variant));
  summary["repetitions"] = reps;
  summary["feasible_splits"] = feasible;
  summary["test_fdr"] = mean_std_json(fdrs);
  summary["test_power"] = mean_std_json(powers);
  write_file_atomic(o.output_dir / "summary.json", summary.dump(2) + "\n");

  if (feasible == 0) out << unattainable_message(o.risk.alpha) << '\n';
  out << summary.dump() << '\n';
  return 0;
}

// --- evaluate --------------------------------------------------------------

namespace {

void write_curves(const fs::path& dir, const std::string& suffix, std::span<const double> u,
                  std::span<const std::uint8_t> adm) {
  std::string arc = join({"rejection_rate", "accuracy"});
  for (const ArcPoint& p : arc_curve(u, adm)) arc += join({num(p.rejection_rate), num(p.accuracy)});
  write_file_atomic(dir / ("arc" + suffix + ".csv"), arc);

  std::string roc = join({"fpr", "tpr"});
  const auto both = std::count(adm.begin(), adm.end(), 1);
  if (both > 0 && static_cast<std::size_t>(both) < adm.size())
    for (const RocPoint& p : roc_curve(u, adm)) roc += join({num(p.fpr), num(p.tpr)});
  write_file_atomic(dir / ("roc" + suffix + ".csv"), roc);
}

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["auroc"] = r.auroc ? ordered_json(*r.auroc) : ordered_json(nullptr);
  j["auarc"] = r.auarc;
  j["fdr"] = r.fdr;
  j["power"] = r.power ? ordered_json(*r.power) : ordered_json(nullptr);
  j["n_accepted"] = r.n_accepted;
  j["n_total"] = r.n_total;
  return j;
}

}  // namespace

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const std::vector<GroundingRecord> records = load_records(o.input);
  const std::vector<std::uint8_t> adm = admissibility(records, o.mlg_seed);

  if (!o.calibration) {
    const UqVariant variant = o.variant.value_or(UqVariant::Com);
    const std::vector<double> u = uncertainties(records, variant, o.input);
    const EvalReport report = evaluate(u, adm, o.tau);
    write_curves(o.output_dir, "", u, adm);
    ordered_json j = report_json(report);
    j["uq_variant"] = std::string(to_string(variant));
    write_file_atomic(o.output_dir / "report.json", j.dump(2) + "\n");
    out << j.dump() << '\n';
    return 0;
  }

  std::string csv = join({"split", "feasible", "threshold", "auroc", "auarc", "fdr", "power", "n_accepted", "n_total"});
  std::vector<double> aurocs, auarcs, fdrs, powers;
  const auto files = calibration_files(*o.calibration);
  std::optional<UqVariant> variant_seen;
  for (std::size_t s = 0; s < files.size(); ++s) {
    const CalibrationArtifact artifact = load_artifact(files[s]);
    const UqVariant variant = resolve_variant(o.variant, artifact);
    if (variant_seen && *variant_seen != variant)
      throw std::invalid_argument("calibration artifacts mix uncertainty variants");
    variant_seen = variant;

    const std::vector<double> u = uncertainties(records, variant, o.input);
    const SplitIndices idx = test_split_for(artifact, records.size());
    const auto test_u = gather<double>(u, idx.test);
    const auto test_adm = gather<std::uint8_t>(adm, idx.test);
    const EvalReport r = evaluate(test_u, test_adm, effective_tau(artifact.outcome.threshold));
    write_curves(o.output_dir, "_" + padded(s), test_u, test_adm);

    if (r.auroc) aurocs.push_back(*r.auroc);
    auarcs.push_back(r.auarc);
    fdrs.push_back(r.fdr);
    if (r.power) powers.push_back(*r.power);
    csv += join({std::to_string(s), artifact.outcome.feasible ? "1" : "0", opt_num(artifact.outcome.threshold),
                 opt_num(r.auroc), num(r.auarc), num(r.fdr), opt_num(r.power), std::to_string(r.n_accepted),
                 std::to_string(r.n_total)});
  }
  write_file_atomic(o.output_dir / "evaluation.csv", csv);

  ordered_json summary;
  summary["uq_variant"] = std::string(to_string(*variant_seen));
  summary["splits"] = files.size();
  summary["auroc"] = mean_std_json(aurocs);
  summary["auarc"] = mean_std_json(auarcs);
  summary["fdr"] = mean_std_json(fdrs);
  summary["power"] = mean_std_json(powers);
  write_file_atomic(o.output_dir / "report.json", summary.dump(2) + "\n");
  out << summary.dump() << '\n';
  return 0;
}

// --- cascade ---------------------------------------------------------------

namespace {

std::vector<std::string> cascade_header() {
  return {"model", "split", "alpha", "feasible", "threshold", "n_total", "accepted", "deferred",
          "cascading_rate", "primary_accuracy", "expert_only_accuracy", "system_accuracy"};
}

std::vector<std::string> cascade_row(const std::string& model, std::size_t split, const std::optional<double>& alpha,
                                     bool feasible, const std::optional<double>& threshold, const CascadeReport& r) {
  return {csv_field(model),
          std::to_string(split),
          opt_num(alpha),
          feasible ? "1" : "0",
          opt_num(threshold),
          std::to_string(r.n_total),
          std::to_string(r.accepted),
          std::to_string(r.deferred),
          num(r.cascading_rate),
          num(r.primary_accuracy),
          opt_num(r.expert_only_accuracy),
          num(r.system_accuracy)};
}

}  // namespace

int cmd_cascade(const CascadeOptions& o, std::ostream& out) {
  const std::vector<GroundingRecord> records = load_records(o.input);
  const std::string model = o.model_label.empty() ? o.input.stem().string() : o.model_label;
  std::string csv = join(cascade_header());

  if (!o.calibration) {
    if (!o.threshold) throw std::invalid_argument("cascade: pass --calibration or --threshold");
    const UqVariant variant = o.variant.value_or(UqVariant::Com);
    const std::vector<double> u = uncertainties(records, variant, o.input);
    const CascadeReport r = evaluate_cascade(records, u, o.threshold, o.mlg_seed);
    const auto deferrals = emit_deferrals(records, u, o.threshold);
    write_file_atomic(o.output_dir / "deferrals.jsonl", serialize_manifest(deferrals));
    csv += join(cascade_row(model, 0, std::nullopt, true, o.threshold, r));
    write_file_atomic(o.output_dir / "cascade.csv", csv);
    out << "system_accuracy=" << num(r.system_accuracy) << " cascading_rate=" << num(r.cascading_rate) << '\n';
    return 0;
  }

  const auto files = calibration_files(*o.calibration);
  std::vector<double> system_acc, rates;
  for (std::size_t s = 0; s < files.size(); ++s) {
    const CalibrationArtifact artifact = load_artifact(files[s]);
    const UqVariant variant = resolve_variant(o.variant, artifact);
    const std::vector<double> u = uncertainties(records, variant, o.input);
    const SplitIndices idx = test_split_for(artifact, records.size());
    const auto test_records = gather<GroundingRecord>(records, idx.test);
    const auto test_u = gather<double>(u, idx.test);

    const std::optional<double> threshold = artifact.outcome.threshold;
    const CascadeReport r = evaluate_cascade(test_records, test_u, threshold, o.mlg_seed);
    const auto deferrals = emit_deferrals(test_records, test_u, threshold);
    write_file_atomic(o.output_dir / ("deferrals_" + padded(s) + ".jsonl"), serialize_manifest(deferrals));
    csv += join(cascade_row(model, s, artifact.risk.alpha, artifact.outcome.feasible, threshold, r));
    system_acc.push_back(r.system_accuracy);
    rates.push_back(r.cascading_rate);
  }
  write_file_atomic(o.output_dir / "cascade.csv", csv);

  ordered_json summary;
  summary["splits"] = files.size();
  summary["system_accuracy"] = mean_std_json(system_acc);
  summary["cascading_rate"] = mean_std_json(rates);
  out << summary.dump() << '\n';
  return 0;
}

// --- sweep -----------------------------------------------------------------

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  if (o.inputs.empty()) throw std::invalid_argument("sweep: no input files");
  if (o.alphas.empty()) throw std::invalid_argument("sweep: no risk levels");
  for (double a : o.alphas) RiskSpec{a, o.delta}.validate();
  const std::vector<int> ks = o.k_values.empty() ? std::vector<int>{o.uq.k_samples} : o.k_values;

  std::string csv = join({"model", "variant", "weights", "k", "alpha", "feasible_rate", "fdr_mean", "fdr_std",
                          "power_mean", "power_std", "auroc_mean", "auroc_std", "auarc_mean", "auarc_std",
                          "system_accuracy_mean", "system_accuracy_std", "cascading_rate_mean",
                          "cascading_rate_std"});

  for (const fs::path& input : o.inputs) {
    const std::vector<GroundingRecord> records = load_records(input);
    o.plan.validate(records.size());
    const std::vector<std::uint8_t> adm = admissibility(records, o.mlg_seed);
    const bool has_expert =
        std::all_of(records.begin(), records.end(), [](const GroundingRecord& r) { return r.expert.has_value(); });
    const std::string model = input.stem().string();

    for (const std::string& preset : o.presets) {
      for (int k : ks) {
        UqConfig uq = o.uq;
        uq.weights = weight_preset(preset);
        uq.k_samples = k;
        uq.validate();
        std::vector<UncertaintyScore> scores(records.size());
        parallel_for(records.size(), [&](std::size_t i) { scores[i] = score_record(records[i], uq); }, o.threads);

        for (UqVariant variant : o.variants) {
          std::vector<double> u(records.size());
          for (std::size_t i = 0; i < records.size(); ++i) {
            if (variant == UqVariant::Pc && !scores[i].pc)
              throw RecordError(i + 1, "pc", in_file("record '" + records[i].id + "' has no pc field", input));
            u[i] = variant_value(scores[i], variant);
          }

          for (double alpha : o.alphas) {
            const RiskSpec risk{alpha, o.delta};
            const auto reps = static_cast<std::size_t>(o.plan.repetitions);
            struct Cell {
              bool feasible = false;
              double fdr = 0.0;
              std::optional<double> power, auroc;
              double auarc = 0.0;
              std::optional<CascadeReport> cascade;
            };
            std::vector<Cell> cells(reps);
            parallel_for(
                reps,
                [&](std::size_t r) {
                  const SplitIndices idx = split_indices(records.size(), o.plan, static_cast<int>(r));
                  const auto cal_u = gather<double>(u, idx.calibration);
                  std::vector<std::uint8_t> cal_err;
                  for (std::size_t i : idx.calibration) cal_err.push_back(static_cast<std::uint8_t>(1 - adm[i]));
                  const CalibrationOutcome cal = calibrate_threshold(cal_u, cal_err, risk);

                  const auto test_u = gather<double>(u, idx.test);
                  const auto test_adm = gather<std::uint8_t>(adm, idx.test);
                  const EvalReport rep = evaluate(test_u, test_adm, effective_tau(cal.threshold));
                  Cell& c = cells[r];
                  c.feasible = cal.feasible;
                  c.fdr = rep.fdr;
                  c.power = rep.power;
                  c.auroc = rep.auroc;
                  c.auarc = rep.auarc;
                  if (has_expert) {
                    const auto test_records = gather<GroundingRecord>(records, idx.test);
                    c.cascade = evaluate_cascade(test_records, test_u, cal.threshold, o.mlg_seed);
                  }
                },
                o.threads);

            std::vector<double> fdr, power, auroc_v, auarc_v, sys, rate;
            std::size_t feasible = 0;
            for (const Cell& c : cells) {
              feasible += c.feasible;
              fdr.push_back(c.fdr);
              if (c.power) power.push_back(*c.power);
              if (c.auroc) auroc_v.push_back(*c.auroc);
              auarc_v.push_back(c.auarc);
              if (c.cascade) {
                sys.push_back(c.cascade->system_accuracy);
                rate.push_back(c.cascade->cascading_rate);
              }
            }
            auto ms = [](const std::vector<double>& v) -> std::pair<std::string, std::string> {
              if (v.empty()) return {"", ""};
              const MeanStd m = mean_std(v);
              return {format_double(m.mean), format_double(m.stddev)};
            };
            const auto [fm, fs_] = ms(fdr);
            const auto [pm, ps] = ms(power);
            const auto [am, as] = ms(auroc_v);
            const auto [rm, rs] = ms(auarc_v);
            const auto [sm, ss] = ms(sys);
            const auto [cm, cs] = ms(rate);
            csv += join({csv_field(model), std::string(to_string(variant)), preset, std::to_string(k), num(alpha),
                         num(static_cast<double>(feasible) / static_cast<double>(reps)), fm, fs_, pm, ps, am, as, rm,
                         rs, sm, ss, cm, cs});
          }
        }
      }
    }
  }

  write_file_atomic(o.output, csv);
  out << "wrote sweep table -> " << o.output.string() << '\n';
  return 0;
}

// --- synth / guarantee -----------------------------------------------------

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  const auto records = generate_dataset(o.config);
  write_file_atomic(o.output, serialize_records(records));
  out << "generated " << records.size() << " records -> " << o.output.string() << '\n';
  return 0;
}

int cmd_guarantee(const GuaranteeCommandOptions& o, std::ostream& out) {
  const GuaranteeResult result = run_guarantee_trials(o.config, o.guarantee);
  if (o.output_csv) {
    std::string csv = join({"trial", "feasible", "tau", "calibration_bound", "test_fdr", "test_accepted", "violation"});
    for (std::size_t t = 0; t < result.outcomes.size(); ++t) {
      const TrialOutcome& x = result.outcomes[t];
      const bool violation = x.feasible && x.test_fdr > result.alpha;
      csv += join({std::to_string(t), x.feasible ? "1" : "0", opt_num(x.threshold),
                   x.feasible ? num(x.calibration_bound) : std::string(), num(x.test_fdr),
                   std::to_string(x.test_accepted), violation ? "1" : "0"});
    }
    write_file_atomic(*o.output_csv, csv);
  }

  ordered_json j;
  j["alpha"] = result.alpha;
  j["delta"] = result.delta;
  j["uq_variant"] = std::string(to_string(o.guarantee.variant));
  j["trials"] = result.trials;
  j["violations"] = result.violations;
  j["infeasible"] = result.infeasible;
  j["violation_rate"] = result.violation_rate();
  j["conditional_violation_rate"] = result.conditional_violation_rate();
  out << j.dump() << '\n';
  return 0;
}

}  // namespace groundrisk::cli
