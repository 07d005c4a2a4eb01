#pragma once

// Shared fixtures and independent reference implementations for the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "wme/engine.hpp"
#include "wme/experts.hpp"
#include "wme/features.hpp"
#include "wme/fixture.hpp"
#include "wme/harness.hpp"
#include "wme/market_data.hpp"
#include "wme/targets.hpp"
#include "wme/trade_metrics.hpp"

namespace wme::testing {

/// Violations the current binary triggers on purpose.
inline std::uint64_t& expected_violations() {
  static std::uint64_t n = 0;
  return n;
}

/// A fixture day pair ready for the engine: two days, in-sample calibration.
struct Scenario {
  std::vector<std::string> tickers;
  DayTimeline timeline;
  FeatureTable z;
  CalibrationArtifacts calibration;
  TruthStore truths;

  MarketFeed feed() const { return {tickers, &z}; }
};

inline Scenario make_scenario(const FixtureParams& params) {
  Scenario s;
  const auto days = generate_fixture(params);
  s.calibration = calibrate(days);
  s.timeline = normalize_timeline(days.at(days.size() - 2), days.back(), s.calibration.volume);
  s.tickers = s.timeline.tickers;
  s.z = znormalize(build_feature_table(s.timeline), s.calibration.stats);
  s.truths = TruthStore(s.timeline, s.calibration.bins);
  return s;
}

inline Scenario make_scenario(std::uint64_t seed, int tickers = 8) {
  FixtureParams p;
  p.seed = seed;
  p.tickers = tickers;
  return make_scenario(p);
}

/// Expert answering from a fixed function of (round, ticker index).
class ScriptedExpert : public Expert {
 public:
  using Fn = std::function<int(int round, int ticker)>;
  ScriptedExpert(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  const std::string& name() const override { return name_; }
  ExpertKind kind() const override { return ExpertKind::kBuiltin; }
  std::vector<Prediction> predict_round(const RoundQuery& q) override {
    std::vector<Prediction> out;
    for (std::size_t t = 0; t < q.tickers.size(); ++t)
      out.push_back({ClassLabel(fn_(q.round, static_cast<int>(t))), false, {}});
    return out;
  }

 private:
  std::string name_;
  Fn fn_;
};

/// Right with probability `skill`, otherwise a uniformly drawn wrong class.
/// Reads labels offline, so it knows the future by construction.
inline ScriptedExpert::Fn noisy_oracle(const TruthStore& truths, double skill, std::uint64_t seed) {
  return [&truths, skill, seed](int round, int ticker) {
    const auto truth = truths.label_offline(round, ticker);
    std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(round) * 1000003u + static_cast<std::uint64_t>(ticker)));
    std::uniform_real_distribution<double> coin(0, 1);
    std::uniform_int_distribution<int> other(1, kClassCount - 1);
    const int t = truth ? truth->value() : kNeutralClass;
    return coin(rng) < skill ? t : (t + other(rng)) % kClassCount;
  };
}

// --- reference weighted-majority loop -------------------------------------

struct ReferenceRun {
  // weights[k] after the update of round rounds[k]
  std::vector<int> rounds;
  std::vector<std::vector<double>> weights;
  // predicted class per (round, ticker) in the same round order
  std::vector<std::vector<int>> ensemble;
};

/// preds[r][j][t]: expert j's class for ticker t at round r (rounds 0-149).
/// label(r, t): ground truth class. Written as a plain transcription of the
/// two-mode procedure with std::vector and explicit loops.
inline ReferenceRun reference_wma(const std::vector<std::vector<std::vector<int>>>& preds,
                                  const std::function<int(int, int)>& label, int n, int m, int mu, int lambda,
                                  bool utility_metric, int r_start, const UtilityMatrix& U,
                                  bool vote_current = false) {
  ReferenceRun out;
  const auto phi = [&](int pred, int truth) {
    return utility_metric ? static_cast<double>(U(truth, pred)) : (pred == truth ? 1.0 : 0.0);
  };
  const auto score = [&](const std::vector<int>& win) {
    std::vector<double> s(n, 0.0);
    for (int j = 0; j < n; ++j) {
      double sum_t = 0;
      for (int t = 0; t < m; ++t) {
        double sum_r = 0;
        for (int r : win) sum_r += phi(preds[r][j][t], label(r, t));
        sum_t += sum_r / static_cast<double>(win.size());
      }
      s[j] = sum_t / m;
    }
    return s;
  };
  const auto normalize = [&](std::vector<double> s) {
    double lo = s[0], hi = s[0];
    for (double x : s) lo = std::min(lo, x), hi = std::max(hi, x);
    if (lo == hi) return std::vector<double>(n, 1.0 / n);
    double total = 0;
    for (double& x : s) x -= lo, total += x;
    for (double& x : s) x /= total;
    return s;
  };
  const auto update = [&](const std::vector<double>& w, const std::vector<double>& s, std::size_t len) {
    const double alpha = 2.0 / (static_cast<double>(len) + 1.0);
    std::vector<double> next(n);
    double total = 0;
    for (int j = 0; j < n; ++j) next[j] = alpha * s[j] + (1 - alpha) * w[j], total += next[j];
    for (double& x : next) x /= total;
    return next;
  };
  const auto vote_round = [&](int r, const std::vector<double>& w) {
    std::vector<int> row(m);
    for (int t = 0; t < m; ++t) {
      double mass[kClassCount] = {0, 0, 0, 0, 0};
      double total = 0;
      for (int j = 0; j < n; ++j) mass[preds[r][j][t]] += w[j];
      for (double x : mass) total += x;
      double best = mass[0];
      for (double x : mass) best = std::max(best, x);
      int chosen = -1;
      for (int c : {2, 1, 3, 0, 4})
        if (chosen < 0 && mass[c] >= best - 1e-12 * total) chosen = c;
      row[t] = chosen;
    }
    return row;
  };
  const auto push = [&](std::vector<int>& win, int r) {
    win.push_back(r);
    if (static_cast<int>(win.size()) > lambda) win.erase(win.begin());
  };

  std::vector<double> w(n, 1.0 / n);
  std::vector<int> win;
  for (int r = r_start; r <= 74; ++r) {
    push(win, r);
    const auto prev = w;
    if (static_cast<int>(win.size()) >= mu)
      w = update(prev, normalize(score(win)), win.size());
    else
      w.assign(n, 1.0 / n);
    out.rounds.push_back(r);
    out.weights.push_back(w);
    out.ensemble.push_back(vote_round(r, vote_current ? w : prev));
  }

  win.clear();
  for (int r = r_start; r <= 65; ++r) push(win, r);
  for (int r = 75; r <= 149; ++r) {
    if (r > 75) push(win, r - 10);
    const auto prev = w;
    if (static_cast<int>(win.size()) >= mu) w = update(prev, normalize(score(win)), win.size());
    out.rounds.push_back(r);
    out.weights.push_back(w);
    out.ensemble.push_back(vote_round(r, vote_current ? w : prev));
  }
  return out;
}

/// Every expert's class at every round, asked one round at a time outside
/// the panel.
inline std::vector<std::vector<std::vector<int>>> prediction_grid(std::vector<std::unique_ptr<Expert>>& experts,
                                                                  const Scenario& s) {
  const int m = static_cast<int>(s.tickers.size());
  std::vector<std::vector<std::vector<int>>> grid(kTimelineRounds,
                                                  std::vector<std::vector<int>>(experts.size(), std::vector<int>(m)));
  const auto feed = s.feed();
  for (int r = 0; r < kTimelineRounds; ++r)
    for (std::size_t j = 0; j < experts.size(); ++j) {
      const auto answers = experts[j]->predict_round(feed.query(r));
      for (int t = 0; t < m; ++t) grid[r][j][t] = answers[t].abstained ? kNeutralClass : answers[t].label.value();
    }
  return grid;
}

struct Agreement {
  double max_weight_error = 0;
  long class_mismatches = 0;
  long compared = 0;
};

/// Runs the engine and the reference on the same roster and compares
/// weights after every round and every ensemble prediction.
inline Agreement compare_with_reference(const Scenario& s, const std::vector<std::string>& names, std::uint64_t seed,
                                        const EngineConfig& cfg) {
  auto solo = builtin_roster(names, seed);
  const auto grid = prediction_grid(solo, s);
  const int n = static_cast<int>(names.size());
  const int m = static_cast<int>(s.tickers.size());
  const auto ref = reference_wma(
      grid, [&](int r, int t) { return s.truths.label_offline(r, t)->value(); }, n, m, cfg.min_window,
      cfg.max_window, cfg.metric == Metric::kUtility, cfg.r_start_train, cfg.utility, cfg.vote_with_current_weights);

  ExpertPanel panel(builtin_roster(names, seed));
  auto truths = s.truths;
  const auto warm = run_training_mode(s.feed(), panel, truths, cfg);
  const auto live = run_inference_mode(s.feed(), panel, truths, warm, cfg);

  Agreement a;
  std::vector<const WeightSnapshot*> snaps;
  for (const auto& x : warm.trajectory) snaps.push_back(&x);
  for (const auto& x : live.trajectory) snaps.push_back(&x);
  std::vector<const EnsemblePrediction*> preds;
  for (const auto& x : warm.predictions) preds.push_back(&x);
  for (const auto& x : live.predictions) preds.push_back(&x);
  if (snaps.size() != ref.rounds.size() || preds.size() != ref.rounds.size() * static_cast<std::size_t>(m)) {
    a.max_weight_error = INFINITY;
    return a;
  }
  for (std::size_t k = 0; k < ref.rounds.size(); ++k) {
    if (snaps[k]->round != ref.rounds[k]) a.max_weight_error = INFINITY;
    for (int j = 0; j < n; ++j)
      a.max_weight_error = std::max(a.max_weight_error, std::abs(snaps[k]->weights(j) - ref.weights[k][j]));
    for (int t = 0; t < m; ++t) {
      const auto* p = preds[k * static_cast<std::size_t>(m) + static_cast<std::size_t>(t)];
      ++a.compared;
      if (p->round != ref.rounds[k] || p->ticker != t || p->label.value() != ref.ensemble[k][t]) ++a.class_mismatches;
    }
  }
  return a;
}

// --- brute-force masking --------------------------------------------------

struct MaskTally {
  long support = 0, trades = 0, total_utility = 0, correct = 0, masked = 0, unlabeled = 0;
};

/// Decides each cell by rescanning the ten preceding rounds for an
/// unmasked extreme.
inline MaskTally brute_force_mask(const std::vector<std::vector<int>>& pred,  // [round][ticker]
                                  const std::vector<std::vector<int>>& truth,  // -1: unlabeled
                                  const UtilityMatrix& U) {
  const int rounds = static_cast<int>(pred.size());
  const int tickers = rounds ? static_cast<int>(pred[0].size()) : 0;
  MaskTally tally;
  for (int t = 0; t < tickers; ++t) {
    std::vector<int> masked(rounds);
    for (int r = 0; r < rounds; ++r) {
      bool m = false;
      for (int q = std::max(0, r - 10); q < r; ++q)
        if ((pred[q][t] == 0 || pred[q][t] == 4) && !masked[q]) m = true;
      masked[r] = m;
    }
    for (int r = 0; r < rounds; ++r) {
      if (truth[r][t] < 0) {
        ++tally.unlabeled;
        continue;
      }
      if (masked[r]) {
        ++tally.masked;
        continue;
      }
      ++tally.support;
      if (pred[r][t] == truth[r][t]) ++tally.correct;
      if (pred[r][t] == 0 || pred[r][t] == 4) ++tally.trades;
      tally.total_utility += U(truth[r][t], pred[r][t]);
    }
  }
  return tally;
}

}  // namespace wme::testing

namespace wme::testing {

/// Single-ticker timeline whose label at round r is labels[r] under
/// kScriptEdges (rounds without an entry are neutral).
inline const BinEdges kScriptEdges{{-0.02, -0.01, 0.01, 0.02}};

inline DayTimeline timeline_with_labels(const std::map<int, int>& labels, int tickers = 1) {
  static constexpr double kStep[] = {-0.03, -0.015, 0.0, 0.015, 0.03};
  DayTimeline tl;
  for (int t = 0; t < tickers; ++t) tl.tickers.push_back("T" + std::to_string(t));
  for (auto* m : {&tl.open, &tl.high, &tl.low, &tl.close, &tl.volume}) m->setOnes(kTimelineRounds, tickers);
  for (int r = 0; r + kLabelDelay < kTimelineRounds; ++r) {
    const auto it = labels.find(r);
    const double d = kStep[it == labels.end() ? kNeutralClass : it->second];
    tl.close.row(r + kLabelDelay).setConstant(tl.close(r, 0) + d);
  }
  return tl;
}

}  // namespace wme::testing
