#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wme/engine.hpp"
#include "wme/error.hpp"
#include "wme/experts.hpp"
#include "wme/features.hpp"
#include "wme/market_data.hpp"
#include "wme/targets.hpp"
#include "wme/trade_metrics.hpp"

namespace wme {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitPartial = 3;

/// Error tagged with the pipeline phase it came from and the exit code it maps to.
class PhaseError : public Error {
 public:
  PhaseError(std::string phase, const std::string& what, int exit_code)
      : Error("[" + phase + "] " + what), phase_(std::move(phase)), exit_code_(exit_code) {}
  const std::string& phase() const noexcept { return phase_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string phase_;
  int exit_code_;
};

/// Exit code for a library exception: 2 for bad input/config, 1 otherwise.
int exit_code_for(const std::exception& e);

/// Default artifact names inside a calibration directory.
inline constexpr const char* kStatsFile = "calibration_stats.csv";
inline constexpr const char* kBinsFile = "bin_edges.txt";
inline constexpr const char* kVolumeFile = "volume_baseline.csv";

struct RunConfig {
  EngineConfig engine;
  /// Built-in names, `cmd:...` or `tcp:host:port` descriptors.
  std::vector<std::string> experts = builtin_names();
  std::uint64_t seed = 0;
  int deadline_ms = 500;
  fs::path prev_day, curr_day;
  fs::path calibration_stats, bin_edges, volume_baseline;
  fs::path utility_matrix;  // empty: built-in matrix

  /// Applies one `key = value` setting. Relative paths resolve against base.
  void set(std::string_view key, std::string_view value, const fs::path& base = {});
  void set_calibration_dir(const fs::path& dir);
  void validate() const;

  /// Flat `key = value` file; `#` starts a comment.
  static RunConfig parse(std::string_view text, const fs::path& base = {});
  static RunConfig load(const fs::path& path);
};

/// "WMA AccWts (5,10)" / "WMA UtilWts (5,10)".
std::string method_label(Metric metric, int min_window, int max_window);

struct EnsembleRun {
  Metric metric = Metric::kAccuracy;
  std::string method;
  TrainingResult training;
  InferenceResult inference;
  TradeReport report;
  Eigen::VectorXd shares;
};

struct DayReplay {
  std::vector<std::string> tickers;
  std::vector<ExpertId> experts;
  std::vector<std::size_t> abstentions;
  std::vector<TradeReport> models;
  TradeReport avg;
  std::vector<EnsembleRun> ensembles;
  TruthStore truths;
  std::vector<std::pair<std::string, std::string>> checksums;  // input -> sha256
};

struct CalibrationArtifacts {
  CalibrationStats stats;
  BinEdges bins;
  VolumeBaseline volume;
};

/// Fits all three artifacts from chronologically ordered day files.
CalibrationArtifacts calibrate(std::span<const std::vector<Candle>> days);
void write_calibration(const CalibrationArtifacts& artifacts, const fs::path& out_dir);

/// Builds the roster named by the config (built-ins and external experts).
ExpertPanel build_panel(const RunConfig& config);

/// Ingest, features, training, inference and trade simulation for one day
/// pair. Runs the engine once per metric over the same roster.
DayReplay replay_day(const RunConfig& config, std::span<const Metric> metrics, ExpertPanel& panel);
DayReplay replay_day(const RunConfig& config, std::span<const Metric> metrics);

/// RunReport JSON; byte-stable for identical inputs.
std::string format_report(const RunConfig& config, const DayReplay& replay);
/// round,expert_name,weight over training and inference rounds.
std::string format_weights_csv(const DayReplay& replay, std::size_t ensemble = 0);
/// round,ticker,class,tie_flag over inference rounds.
std::string format_predictions_csv(const DayReplay& replay, std::size_t ensemble = 0);

/// Writes report.json, weights.csv, predictions.csv and truths.csv.
void write_replay(const RunConfig& config, const DayReplay& replay, const fs::path& out_dir);

struct SweepWindow {
  int min_window = 5;
  int max_window = 10;
};

struct DayPair {
  fs::path prev_day, curr_day;
};

struct SweepRow {
  std::string window;  // "(5,10)"
  std::string method;
  double accuracy_mean = 0, accuracy_std = 0;
  double utility_mean = 0, utility_std = 0;
  int days = 0;
};

struct SweepResult {
  std::vector<SweepRow> summary;
  std::vector<std::string> failures;
  int reports = 0;
};

/// One report per (window, day pair), each carrying both WMA variants, plus
/// summary.csv with mean and population std across days per method.
SweepResult run_sweep(const RunConfig& base, std::span<const DayPair> pairs, std::span<const SweepWindow> windows,
                      const fs::path& out_dir);
std::string format_summary_csv(std::span<const SweepRow> rows);

std::string sha256_hex(std::string_view data);

}  // namespace wme
