// groundrisk: score, calibrate and evaluate risk-controlled accept/defer
// decisions for recorded GUI-grounding predictions.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commands.hpp"

namespace {

using namespace groundrisk;
using namespace groundrisk::cli;

void add_uq_options(CLI::App& cmd, UqConfig& uq, std::string& preset, std::vector<double>& weights) {
  cmd.add_option("--k", uq.k_samples, "Use only the first K samples of each record")->capture_default_str();
  cmd.add_option("--patch-size", uq.patch_size, "Patch size in pixels")->capture_default_str();
  cmd.add_option("--beta", uq.beta, "Region threshold ratio")->capture_default_str();
  cmd.add_option("--epsilon", uq.epsilon, "Numerical stabilizer")->capture_default_str();
  auto* p = cmd.add_option("--preset", preset, "Weight preset: original, v1..v6");
  cmd.add_option("--weights", weights, "Weights w_cd,w_ie,w_ta")->delimiter(',')->expected(3)->excludes(p);
}

void apply_weights(UqConfig& uq, const std::string& preset, const std::vector<double>& weights) {
  if (!preset.empty()) uq.weights = weight_preset(preset);
  if (weights.size() == 3) uq.weights = {weights[0], weights[1], weights[2]};
}

void add_synth_options(CLI::App& cmd, SynthConfig& c) {
  cmd.add_option("--records", c.n_records, "Number of records")->capture_default_str();
  cmd.add_option("--samples", c.k_samples, "Samples per record")->capture_default_str();
  cmd.add_option("--image-width", c.image_width)->capture_default_str();
  cmd.add_option("--image-height", c.image_height)->capture_default_str();
  cmd.add_option("--box-width", c.box_width)->capture_default_str();
  cmd.add_option("--box-height", c.box_height)->capture_default_str();
  cmd.add_option("--easy-fraction", c.easy_fraction, "Fraction of concentrated, correct records")
      ->capture_default_str();
  cmd.add_option("--dispersion", c.dispersion, "Spread of hard-record modes, pixels")->capture_default_str();
  cmd.add_option("--expert-accuracy", c.expert_accuracy)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-controlled selective prediction for GUI grounding"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI config file");

  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("--seed", seed, "Seed for splits, MLG selection and synthesis")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  // score
  ScoreOptions score;
  std::string score_preset;
  std::vector<double> score_weights;
  std::string density_dir;
  auto* score_cmd = app.add_subcommand("score", "Append uncertainty scores to a record file");
  score_cmd->add_option("--in", score.input, "Input records (JSONL)")->required();
  score_cmd->add_option("--out", score.output, "Scored output (JSONL)")->required();
  score_cmd->add_option("--dump-density", density_dir, "Write each record's density map as CSV here");
  add_uq_options(*score_cmd, score.uq, score_preset, score_weights);

  // calibrate
  CalibrateOptions calibrate;
  std::string calibrate_variant = "com";
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate the acceptance threshold on repeated splits");
  calibrate_cmd->add_option("--in", calibrate.input, "Scored records")->required();
  calibrate_cmd->add_option("--out", calibrate.output_dir, "Output directory")->required();
  calibrate_cmd->add_option("--alpha", calibrate.risk.alpha, "Risk level")->capture_default_str();
  calibrate_cmd->add_option("--delta", calibrate.risk.delta, "Significance level")->capture_default_str();
  calibrate_cmd->add_option("--ratio", calibrate.plan.calibration_ratio, "Calibration fraction")->capture_default_str();
  calibrate_cmd->add_option("--repetitions", calibrate.plan.repetitions, "Number of random splits")
      ->capture_default_str();
  calibrate_cmd->add_option("--variant", calibrate_variant, "com|ta|ie|cd|pc")->capture_default_str();

  // evaluate
  EvaluateOptions evaluate;
  std::string evaluate_variant, evaluate_calibration;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "AUROC, AUARC, FDR and power with ROC/ARC curves");
  evaluate_cmd->add_option("--in", evaluate.input, "Scored records")->required();
  evaluate_cmd->add_option("--out", evaluate.output_dir, "Output directory")->required();
  evaluate_cmd->add_option("--calibration", evaluate_calibration, "Calibration artifact or directory");
  evaluate_cmd->add_option("--variant", evaluate_variant, "com|ta|ie|cd|pc");
  evaluate_cmd->add_option("--tau", evaluate.tau, "Threshold when no calibration is given");

  // cascade
  CascadeOptions cascade;
  std::string cascade_variant, cascade_calibration;
  double cascade_threshold = 0.0;
  auto* cascade_cmd = app.add_subcommand("cascade", "Accept or defer to the recorded expert");
  cascade_cmd->add_option("--in", cascade.input, "Scored records")->required();
  cascade_cmd->add_option("--out", cascade.output_dir, "Output directory")->required();
  auto* cal_opt = cascade_cmd->add_option("--calibration", cascade_calibration, "Calibration artifact or directory");
  auto* thr_opt = cascade_cmd->add_option("--threshold", cascade_threshold, "Fixed threshold")->excludes(cal_opt);
  cascade_cmd->add_option("--variant", cascade_variant, "com|ta|ie|cd|pc");
  cascade_cmd->add_option("--model", cascade.model_label, "Label for the model column (default: input file stem)");

  // sweep
  SweepOptions sweep;
  std::vector<std::string> sweep_variants{"com"};
  std::vector<std::string> sweep_inputs;
  auto* sweep_cmd = app.add_subcommand("sweep", "Risk level x variant x weights x K table");
  sweep_cmd->add_option("--in", sweep_inputs, "Record files, one per model")->required()->delimiter(',');
  sweep_cmd->add_option("--out", sweep.output, "Output CSV")->required();
  sweep_cmd->add_option("--alphas", sweep.alphas, "Risk levels")->required()->delimiter(',');
  sweep_cmd->add_option("--variants", sweep_variants, "Uncertainty variants")->delimiter(',');
  sweep_cmd->add_option("--presets", sweep.presets, "Weight presets")->delimiter(',');
  sweep_cmd->add_option("--k-values", sweep.k_values, "Sample counts")->delimiter(',');
  sweep_cmd->add_option("--delta", sweep.delta)->capture_default_str();
  sweep_cmd->add_option("--ratio", sweep.plan.calibration_ratio)->capture_default_str();
  sweep_cmd->add_option("--repetitions", sweep.plan.repetitions)->capture_default_str();
  sweep_cmd->add_option("--patch-size", sweep.uq.patch_size)->capture_default_str();
  sweep_cmd->add_option("--beta", sweep.uq.beta)->capture_default_str();

  // synth
  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic record file");
  synth_cmd->add_option("--out", synth.output, "Output records (JSONL)")->required();
  add_synth_options(*synth_cmd, synth.config);

  // guarantee
  GuaranteeCommandOptions guarantee;
  guarantee.guarantee.risk.alpha = 0.2;
  std::string guarantee_variant = "com", guarantee_csv;
  auto* guarantee_cmd = app.add_subcommand("guarantee", "Monte Carlo check of the FDR guarantee");
  add_synth_options(*guarantee_cmd, guarantee.config);
  guarantee_cmd->add_option("--alpha", guarantee.guarantee.risk.alpha)->capture_default_str();
  guarantee_cmd->add_option("--delta", guarantee.guarantee.risk.delta)->capture_default_str();
  guarantee_cmd->add_option("--ratio", guarantee.guarantee.calibration_ratio)->capture_default_str();
  guarantee_cmd->add_option("--trials", guarantee.guarantee.trials)->capture_default_str();
  guarantee_cmd->add_option("--variant", guarantee_variant, "com|ta|ie|cd|pc")->capture_default_str();
  guarantee_cmd->add_option("--csv", guarantee_csv, "Per-trial CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score_cmd) {
      apply_weights(score.uq, score_preset, score_weights);
      if (!density_dir.empty()) score.density_dir = density_dir;
      score.threads = threads;
      return cmd_score(score, std::cout);
    }
    if (*calibrate_cmd) {
      calibrate.variant = parse_variant(calibrate_variant);
      calibrate.plan.seed = seed;
      calibrate.mlg_seed = seed;
      calibrate.threads = threads;
      return cmd_calibrate(calibrate, std::cout);
    }
    if (*evaluate_cmd) {
      if (!evaluate_variant.empty()) evaluate.variant = parse_variant(evaluate_variant);
      if (!evaluate_calibration.empty()) evaluate.calibration = evaluate_calibration;
      evaluate.mlg_seed = seed;
      return cmd_evaluate(evaluate, std::cout);
    }
    if (*cascade_cmd) {
      if (!cascade_variant.empty()) cascade.variant = parse_variant(cascade_variant);
      if (!cascade_calibration.empty()) cascade.calibration = cascade_calibration;
      if (*thr_opt) cascade.threshold = cascade_threshold;
      cascade.mlg_seed = seed;
      return cmd_cascade(cascade, std::cout);
    }
    if (*sweep_cmd) {
      sweep.variants.clear();
      for (const auto& v : sweep_variants) sweep.variants.push_back(parse_variant(v));
      for (const auto& f : sweep_inputs) sweep.inputs.emplace_back(f);
      sweep.plan.seed = seed;
      sweep.mlg_seed = seed;
      sweep.threads = threads;
      return cmd_sweep(sweep, std::cout);
    }
    if (*synth_cmd) {
      synth.config.seed = seed;
      return cmd_synth(synth, std::cout);
    }
    if (*guarantee_cmd) {
      guarantee.config.seed = seed;
      guarantee.guarantee.variant = parse_variant(guarantee_variant);
      guarantee.guarantee.threads = threads;
      if (!guarantee_csv.empty()) guarantee.output_csv = guarantee_csv;
      return cmd_guarantee(guarantee, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
