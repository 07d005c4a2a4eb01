#include "wme/engine.hpp"

#include "wme/error.hpp"

namespace wme {

std::string_view metric_name(Metric m) { return m == Metric::kAccuracy ? "accuracy" : "utility"; }

Metric parse_metric(std::string_view text) {
  if (text == "accuracy") return Metric::kAccuracy;
  if (text == "utility") return Metric::kUtility;
  throw ConfigError("phi must be accuracy or utility, got \"" + std::string(text) + "\"");
}

void EngineConfig::validate() const {
  if (min_window < 1) throw ConfigError("mu must be >= 1");
  if (max_window < min_window) throw ConfigError("lambda must be >= mu");
  if (r_start_train < 0 || r_start_train >= kCurrentDayStart) throw ConfigError("r_start_train must lie in [0, 74]");
}

void ScoreWindow::push(WindowRound round) {
  rounds_.push_back(std::move(round));
  while (size() > max_) rounds_.pop_front();
}

std::vector<int> ScoreWindow::round_ids() const {
  std::vector<int> out;
  for (const auto& r : rounds_) out.push_back(r.round);
  return out;
}

std::optional<Eigen::VectorXd> score_experts(const ScoreWindow& window, Metric metric, const UtilityMatrix& utility) {
  if (!window.scorable() || window.size() == 0) return std::nullopt;
  const auto& first = window.rounds().front();
  const Eigen::Index n = first.predictions.rows();
  const Eigen::Index m = first.predictions.cols();
  Eigen::MatrixXd per_ticker = Eigen::MatrixXd::Zero(n, m);
  for (const auto& wr : window.rounds())
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index t = 0; t < m; ++t) {
        const int pred = wr.predictions(j, t);
        const int truth = wr.truths(t);
        per_ticker(j, t) += metric == Metric::kAccuracy ? (pred == truth ? 1.0 : 0.0) : utility(truth, pred);
      }
  per_ticker /= static_cast<double>(window.size());
  return Eigen::VectorXd(per_ticker.rowwise().mean());
}

std::optional<double> score_expert(const ScoreWindow& window, int expert, Metric metric, const UtilityMatrix& utility) {
  auto all = score_experts(window, metric, utility);
  if (!all) return std::nullopt;
  return (*all)(expert);
}

RoundQuery MarketFeed::query(int round) const {
  const auto m = tickers.size();
  const auto offset = static_cast<std::size_t>(round) * m;
  return {round, tickers, features->rows().subspan(offset, m)};
}

namespace {

Eigen::VectorXi truth_row(const TruthStore& truths, int round, int m) {
  Eigen::VectorXi out(m);
  for (int t = 0; t < m; ++t) out(t) = truths.label(round, t).value();
  return out;
}

void emit_votes(int round, const Eigen::MatrixXi& classes, const Eigen::VectorXd& weights,
                std::vector<EnsemblePrediction>& out) {
  for (Eigen::Index t = 0; t < classes.cols(); ++t) {
    const Vote v = vote(classes.col(t), weights);
    out.push_back({round, static_cast<int>(t), v.label, v.mass, v.tie});
  }
}

}  // namespace

TrainingResult run_training_mode(const MarketFeed& feed, ExpertPanel& experts, TruthStore& truths,
                                 const EngineConfig& config) {
  config.validate();
  const int n = experts.size();
  const int m = static_cast<int>(feed.tickers.size());
  if (n < 1) throw ConfigError("at least one expert is required");
  truths.enter_training();

  TrainingResult result;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
  ScoreWindow window(config.min_window, config.max_window);
  for (int r = config.r_start_train; r < kCurrentDayStart; ++r) {
    if (!truths.has_label(r)) throw DataError("missing ground truth for training round " + std::to_string(r));
    auto preds = experts.query(feed.query(r));
    window.push({r, preds.classes, truth_row(truths, r, m)});

    const Eigen::VectorXd prev = w;
    bool scored = false;
    if (auto raw = score_experts(window, config.metric, config.utility)) {
      w = ema_update(prev, normalize_scores(*raw), window.size());
      scored = true;
    } else {
      w = Eigen::VectorXd::Constant(n, 1.0 / n);
    }
    emit_votes(r, preds.classes, config.vote_with_current_weights ? w : prev, result.predictions);
    result.trajectory.push_back({r, w, scored, window.round_ids()});
    result.history.emplace(r, std::move(preds.classes));
    result.records.insert(result.records.end(), preds.records.begin(), preds.records.end());
  }
  result.weights = {w, kCurrentDayStart - 1};
  return result;
}

InferenceResult run_inference_mode(const MarketFeed& feed, ExpertPanel& experts, TruthStore& truths,
                                   const TrainingResult& warm, const EngineConfig& config) {
  config.validate();
  const int n = experts.size();
  const int m = static_cast<int>(feed.tickers.size());
  if (n < 1) throw ConfigError("at least one expert is required");
  if (warm.weights.values.size() != n) throw ConfigError("warm weights do not match the roster");
  const int last_round = truths.rounds() - 1;

  InferenceResult result;
  ScoreWindow window(config.min_window, config.max_window);
  truths.enter_inference(kCurrentDayStart);
  for (int r = config.r_start_train; r <= kCurrentDayStart - kLabelDelay; ++r) {
    auto it = warm.history.find(r);
    if (it != warm.history.end()) window.push({r, it->second, truth_row(truths, r, m)});
  }

  Eigen::VectorXd w = warm.weights.values;
  const auto prediction_for = [&](int round) -> const Eigen::MatrixXi* {
    if (auto it = result.history.find(round); it != result.history.end()) return &it->second;
    if (auto it = warm.history.find(round); it != warm.history.end()) return &it->second;
    return nullptr;
  };

  for (int r = kCurrentDayStart; r <= last_round; ++r) {
    truths.enter_inference(r);
    if (r > kCurrentDayStart) {
      const int resolved = r - kLabelDelay;
      if (const auto* p = prediction_for(resolved)) window.push({resolved, *p, truth_row(truths, resolved, m)});
    }
    auto preds = experts.query(feed.query(r));

    const Eigen::VectorXd prev = w;
    bool scored = false;
    if (auto raw = score_experts(window, config.metric, config.utility)) {
      w = ema_update(prev, normalize_scores(*raw), window.size());
      scored = true;
    }
    emit_votes(r, preds.classes, config.vote_with_current_weights ? w : prev, result.predictions);
    result.trajectory.push_back({r, w, scored, window.round_ids()});
    result.history.emplace(r, std::move(preds.classes));
    result.records.insert(result.records.end(), preds.records.begin(), preds.records.end());
  }
  return result;
}

}  // namespace wme
