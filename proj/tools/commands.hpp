#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "groundrisk/records.hpp"
#include "groundrisk/risk.hpp"
#include "groundrisk/synthgen.hpp"
#include "groundrisk/uq.hpp"

namespace groundrisk::cli {

namespace fs = std::filesystem;

struct ScoreOptions {
  fs::path input;
  fs::path output;
  UqConfig uq;
  std::optional<fs::path> density_dir;  // one <id>.csv per record
  unsigned threads = 0;
};

struct CalibrateOptions {
  fs::path input;
  fs::path output_dir;
  RiskSpec risk;
  SplitPlan plan;
  UqVariant variant = UqVariant::Com;
  std::uint64_t mlg_seed = 0;
  unsigned threads = 0;
};

struct EvaluateOptions {
  fs::path input;
  std::optional<fs::path> calibration;  // artifact file or calibrate output dir
  fs::path output_dir;
  std::optional<UqVariant> variant;
  double tau = std::numeric_limits<double>::infinity();  // used without a calibration
  std::uint64_t mlg_seed = 0;
};

struct CascadeOptions {
  fs::path input;
  std::optional<fs::path> calibration;
  std::optional<double> threshold;  // used without a calibration
  fs::path output_dir;
  std::optional<UqVariant> variant;
  std::string model_label;
  std::uint64_t mlg_seed = 0;
};

struct SweepOptions {
  std::vector<fs::path> inputs;
  fs::path output;
  std::vector<double> alphas;
  std::vector<UqVariant> variants{UqVariant::Com};
  std::vector<std::string> presets{"original"};
  std::vector<int> k_values;  // empty: use uq.k_samples
  UqConfig uq;
  double delta = 0.05;
  SplitPlan plan;
  std::uint64_t mlg_seed = 0;
  unsigned threads = 0;
};

struct SynthOptions {
  SynthConfig config;
  fs::path output;
};

struct GuaranteeCommandOptions {
  SynthConfig config;
  GuaranteeOptions guarantee;
  std::optional<fs::path> output_csv;
};

/// Each returns a process exit code and prints a summary to `out`.
/// Operational failures throw; an unattainable risk level does not.
int cmd_score(const ScoreOptions& options, std::ostream& out);
int cmd_calibrate(const CalibrateOptions& options, std::ostream& out);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out);
int cmd_cascade(const CascadeOptions& options, std::ostream& out);
int cmd_sweep(const SweepOptions& options, std::ostream& out);
int cmd_synth(const SynthOptions& options, std::ostream& out);
int cmd_guarantee(const GuaranteeCommandOptions& options, std::ostream& out);

std::vector<GroundingRecord> load_records(const fs::path& path);

/// Artifacts from a single file, or every calibration_*.json in a directory
/// in name order.
std::vector<fs::path> calibration_files(const fs::path& path);

std::string unattainable_message(double alpha);

}  // namespace groundrisk::cli
