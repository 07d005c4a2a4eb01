#pragma once

#include <Eigen/Core>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wme/experts.hpp"
#include "wme/features.hpp"
#include "wme/targets.hpp"
#include "wme/utility.hpp"
#include "wme/wma.hpp"

namespace wme {

enum class Metric { kAccuracy, kUtility };

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view text);

struct EngineConfig {
  int min_window = 5;   // mu
  int max_window = 10;  // lambda
  Metric metric = Metric::kAccuracy;
  int r_start_train = 30;
  /// Vote with this round's freshly updated weights instead of last round's.
  bool vote_with_current_weights = false;
  UtilityMatrix utility = default_utility_matrix();

  void validate() const;
};

struct WeightVector {
  Eigen::VectorXd values;
  int round = -1;

  static WeightVector uniform(int n, int round = -1) {
    return {Eigen::VectorXd::Constant(n, 1.0 / n), round};
  }
};

/// One truth-resolved round held in the scoring window.
struct WindowRound {
  int round = 0;
  Eigen::MatrixXi predictions;  // experts x tickers
  Eigen::VectorXi truths;       // per ticker
};

/// Bounded queue of resolved rounds: at most max_len, scorable from min_len.
class ScoreWindow {
 public:
  ScoreWindow(int min_len, int max_len) : min_(min_len), max_(max_len) {}

  /// Appends and evicts the oldest round beyond capacity.
  void push(WindowRound round);
  int size() const { return static_cast<int>(rounds_.size()); }
  bool scorable() const { return size() >= min_; }
  const std::deque<WindowRound>& rounds() const { return rounds_; }
  std::vector<int> round_ids() const;

 private:
  int min_;
  int max_;
  std::deque<WindowRound> rounds_;
};

/// Per-(expert, ticker) phi over the window, averaged across tickers.
/// Returns nullopt when the window holds fewer than min rounds.
std::optional<double> score_expert(const ScoreWindow& window, int expert, Metric metric, const UtilityMatrix& utility);
std::optional<Eigen::VectorXd> score_experts(const ScoreWindow& window, Metric metric, const UtilityMatrix& utility);

struct EnsemblePrediction {
  int round = 0;
  int ticker = 0;
  ClassLabel label;
  VoteMass mass = VoteMass::Zero();
  bool tie = false;
};

struct WeightSnapshot {
  int round = 0;
  Eigen::VectorXd weights;
  bool scored = false;
  std::vector<int> window;  // resolved rounds held when the weights were set
};

/// Expert predictions by round (experts x tickers).
using PredictionHistory = std::map<int, Eigen::MatrixXi>;

struct TrainingResult {
  WeightVector weights;
  std::vector<WeightSnapshot> trajectory;
  std::vector<EnsemblePrediction> predictions;
  PredictionHistory history;
  std::vector<PredictionRecord> records;
};

struct InferenceResult {
  std::vector<EnsemblePrediction> predictions;
  std::vector<WeightSnapshot> trajectory;
  PredictionHistory history;
  std::vector<PredictionRecord> records;
};

/// Inputs shared by both modes: z-normalized features and the ticker order.
struct MarketFeed {
  std::span<const std::string> tickers;
  const FeatureTable* features = nullptr;

  RoundQuery query(int round) const;
};

/// Previous-day warm-up over rounds r_start_train..74.
TrainingResult run_training_mode(const MarketFeed& feed, ExpertPanel& experts, TruthStore& truths,
                                 const EngineConfig& config);

/// Live loop over rounds 75..149 with the 10-round label delay.
InferenceResult run_inference_mode(const MarketFeed& feed, ExpertPanel& experts, TruthStore& truths,
                                   const TrainingResult& warm, const EngineConfig& config);

}  // namespace wme
