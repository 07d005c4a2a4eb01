#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "wme/engine.hpp"
#include "wme/targets.hpp"
#include "wme/utility.hpp"

namespace wme {

/// Rounds skipped after an extreme prediction while the position is held.
inline constexpr int kHoldRounds = 10;

struct TradeReport {
  std::string name;
  double accuracy = 0;        // correct / support
  long support = 0;           // unmasked labelled predictions
  long total_utility = 0;
  double utility_per_prediction = 0;  // total_utility / support
  long trades = 0;            // unmasked labelled extreme predictions
  long correct = 0;
  long masked = 0;            // labelled predictions skipped while holding
  long unlabeled = 0;         // predictions without ground truth
};

/// Predicted classes for one model: rows are rounds first_round.., columns
/// tickers.
struct PredictionStream {
  int first_round = kCurrentDayStart;
  Eigen::MatrixXi classes;
};

/// Masked trade simulation. Per ticker, an unmasked 0 or 4 is scored and
/// masks the next 10 rounds; masked rounds are skipped; rounds without
/// ground truth are never tallied.
TradeReport simulate_masked(const PredictionStream& predictions, const TruthStore& truths,
                            const UtilityMatrix& utility = default_utility_matrix(), std::string name = {});

/// Mean of per-model accuracy and utility-per-prediction.
TradeReport avg_model(std::span<const TradeReport> reports);

/// share_j = sum_r w_j(r) / sum_r sum_k w_k(r).
Eigen::VectorXd reward_shares(std::span<const WeightSnapshot> trajectory);

/// Rows of one expert's predictions gathered from a history map.
PredictionStream expert_stream(const PredictionHistory& history, int expert, int first_round, int last_round);
PredictionStream ensemble_stream(std::span<const EnsemblePrediction> predictions, int tickers, int first_round,
                                 int last_round);

}  // namespace wme
