#include "wme/trade_metrics.hpp"

#include "wme/error.hpp"

namespace wme {

TradeReport simulate_masked(const PredictionStream& predictions, const TruthStore& truths, const UtilityMatrix& utility,
                            std::string name) {
  TradeReport rep;
  rep.name = std::move(name);
  const auto& classes = predictions.classes;
  for (Eigen::Index t = 0; t < classes.cols(); ++t) {
    int hold = 0;
    for (Eigen::Index i = 0; i < classes.rows(); ++i) {
      const int round = predictions.first_round + static_cast<int>(i);
      const ClassLabel pred(classes(i, t));
      const auto truth = truths.label_offline(round, static_cast<int>(t));
      if (hold > 0) {
        --hold;
        (truth ? rep.masked : rep.unlabeled) += 1;
        continue;
      }
      if (pred.is_extreme()) hold = kHoldRounds;
      if (!truth) {
        ++rep.unlabeled;
        continue;
      }
      ++rep.support;
      if (pred == *truth) ++rep.correct;
      if (pred.is_extreme()) ++rep.trades;
      rep.total_utility += utility_of(utility, *truth, pred);
    }
  }
  if (rep.support > 0) {
    rep.accuracy = static_cast<double>(rep.correct) / static_cast<double>(rep.support);
    rep.utility_per_prediction = static_cast<double>(rep.total_utility) / static_cast<double>(rep.support);
  }
  return rep;
}

TradeReport avg_model(std::span<const TradeReport> reports) {
  if (reports.empty()) throw ConfigError("AVG_MODEL needs at least one model report");
  TradeReport out;
  out.name = "AVG_MODEL";
  for (const auto& r : reports) {
    out.accuracy += r.accuracy;
    out.utility_per_prediction += r.utility_per_prediction;
  }
  out.accuracy /= static_cast<double>(reports.size());
  out.utility_per_prediction /= static_cast<double>(reports.size());
  return out;
}

Eigen::VectorXd reward_shares(std::span<const WeightSnapshot> trajectory) {
  if (trajectory.empty()) throw ConfigError("reward shares need a non-empty trajectory");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(trajectory.front().weights.size());
  for (const auto& s : trajectory) total += s.weights;
  return total / total.sum();
}

PredictionStream expert_stream(const PredictionHistory& history, int expert, int first_round, int last_round) {
  PredictionStream s;
  s.first_round = first_round;
  for (int r = first_round; r <= last_round; ++r) {
    auto it = history.find(r);
    if (it == history.end()) throw DataError("no predictions recorded for round " + std::to_string(r));
    if (r == first_round) s.classes.resize(last_round - first_round + 1, it->second.cols());
    s.classes.row(r - first_round) = it->second.row(expert);
  }
  return s;
}

PredictionStream ensemble_stream(std::span<const EnsemblePrediction> predictions, int tickers, int first_round,
                                 int last_round) {
  PredictionStream s;
  s.first_round = first_round;
  s.classes = Eigen::MatrixXi::Constant(last_round - first_round + 1, tickers, -1);
  for (const auto& p : predictions)
    if (p.round >= first_round && p.round <= last_round) s.classes(p.round - first_round, p.ticker) = p.label.value();
  if ((s.classes.array() < 0).any()) throw DataError("ensemble predictions do not cover every round and ticker");
  return s;
}

}  // namespace wme
