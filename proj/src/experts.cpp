#include "wme/experts.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "wme/error.hpp"
#include "wme/seed.hpp"

namespace wme {

std::vector<Prediction> RuleExpert::predict_round(const RoundQuery& query) {
  std::vector<Prediction> out;
  out.reserve(query.tickers.size());
  for (std::size_t t = 0; t < query.tickers.size(); ++t)
    out.push_back({rule_(query.round, query.tickers[t], query.features[t]), false, {}});
  return out;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "constant2",    "seeded-random", "sma-crossover",    "rsi-reversal",
      "momentum-quantile", "slope-vote", "changelen-streak", "bollinger-band",
  };
  return names;
}

std::unique_ptr<RuleExpert> make_builtin(const std::string& name, std::uint64_t run_seed) {
  const std::string base = name.substr(0, name.find('@'));
  RuleExpert::Rule rule;
  if (base == "constant2") {
    rule = [](int, const std::string&, const FeatureVector&) { return ClassLabel(kNeutralClass); };
  } else if (base == "seeded-random") {
    // Pure function of (seed, round, ticker).
    const std::uint64_t seed = child_seed(run_seed, name);
    rule = [seed](int round, const std::string& ticker, const FeatureVector&) {
      const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(round) ^ (fnv1a(ticker) << 8)));
      return ClassLabel(static_cast<int>(h % kClassCount));
    };
  } else if (base == "sma-crossover") {
    // Short SMA above long SMA means SMA_20 - SMA_10 < 0: an uptrend.
    rule = [](int, const std::string&, const FeatureVector& z) { return class_from_z(-z[kSma20MinusSma10]); };
  } else if (base == "rsi-reversal") {
    rule = [](int, const std::string&, const FeatureVector& z) { return class_from_z(-z[kRsi14]); };
  } else if (base == "momentum-quantile") {
    rule = [](int, const std::string&, const FeatureVector& z) { return class_from_z(z[kMom30]); };
  } else if (base == "slope-vote") {
    rule = [](int, const std::string&, const FeatureVector& z) {
      return class_from_z((z[kCloseSlope3] + z[kCloseSlope5] + z[kCloseSlope10]) / 3.0);
    };
  } else if (base == "changelen-streak") {
    rule = [](int, const std::string&, const FeatureVector& z) { return class_from_z(z[kChangelenClose]); };
  } else if (base == "bollinger-band") {
    rule = [](int, const std::string&, const FeatureVector& z) { return class_from_z(-z[kBbPercent]); };
  } else {
    throw ConfigError("unknown built-in expert \"" + name + "\"");
  }
  return std::make_unique<RuleExpert>(name, std::move(rule));
}

std::vector<std::unique_ptr<Expert>> builtin_roster(std::span<const std::string> names, std::uint64_t run_seed) {
  std::vector<std::unique_ptr<Expert>> out;
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw ConfigError("duplicate expert name \"" + n + "\"");
    out.push_back(make_builtin(n, run_seed));
  }
  return out;
}

ExpertPanel::ExpertPanel(std::vector<std::unique_ptr<Expert>> experts) {
  for (auto& e : experts) add(std::move(e));
}

void ExpertPanel::add(std::unique_ptr<Expert> expert) {
  if (!expert) throw ConfigError("null expert");
  for (const auto& e : experts_)
    if (e->name() == expert->name()) throw ConfigError("duplicate expert name \"" + expert->name() + "\"");
  experts_.push_back(std::move(expert));
}

std::vector<ExpertId> ExpertPanel::ids() const {
  std::vector<ExpertId> out;
  for (std::size_t j = 0; j < experts_.size(); ++j)
    out.push_back({static_cast<int>(j), experts_[j]->name(), experts_[j]->kind()});
  return out;
}

std::vector<std::string> ExpertPanel::names() const {
  std::vector<std::string> out;
  for (const auto& e : experts_) out.push_back(e->name());
  return out;
}

RoundPredictions ExpertPanel::query(const RoundQuery& query) {
  const int n = size();
  const int m = static_cast<int>(query.tickers.size());
  std::vector<std::vector<Prediction>> answers(static_cast<std::size_t>(n));
  std::vector<std::future<std::vector<Prediction>>> pending(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    if (experts_[j]->kind() == ExpertKind::kExternal)
      pending[j] = std::async(std::launch::async, [&, j] { return experts_[j]->predict_round(query); });
  for (int j = 0; j < n; ++j)
    answers[j] = pending[j].valid() ? pending[j].get() : experts_[j]->predict_round(query);

  RoundPredictions out;
  out.round = query.round;
  out.classes.resize(n, m);
  out.records.reserve(static_cast<std::size_t>(n * m));
  for (int j = 0; j < n; ++j) {
    if (static_cast<int>(answers[j].size()) != m)
      throw DataError("expert \"" + experts_[j]->name() + "\" returned the wrong number of predictions");
    for (int t = 0; t < m; ++t) {
      const auto& p = answers[j][t];
      const ClassLabel label = p.abstained ? ClassLabel(kNeutralClass) : p.label;
      out.classes(j, t) = label.value();
      out.records.push_back({j, query.round, t, label, p.latency, p.abstained});
    }
  }
  return out;
}

}  // namespace wme
