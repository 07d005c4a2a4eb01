#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wme/features.hpp"
#include "wme/targets.hpp"

namespace wme {

enum class ExpertKind { kBuiltin, kExternal };

struct ExpertId {
  int index = 0;
  std::string name;
  ExpertKind kind = ExpertKind::kBuiltin;
};

/// One expert's answer for one (round, ticker). Abstentions carry class 2.
struct Prediction {
  ClassLabel label;
  bool abstained = false;
  std::chrono::microseconds latency{0};
};

struct PredictionRecord {
  int expert = 0;
  int round = 0;
  int ticker = 0;
  ClassLabel label;
  std::chrono::microseconds latency{0};
  bool abstained = false;
};

/// What every expert sees in a round: z-normalized features per ticker.
struct RoundQuery {
  int round = 0;
  std::span<const std::string> tickers;
  std::span<const FeatureVector> features;
};

class Expert {
 public:
  virtual ~Expert() = default;
  virtual const std::string& name() const = 0;
  virtual ExpertKind kind() const = 0;
  /// One prediction per ticker, in ticker order.
  virtual std::vector<Prediction> predict_round(const RoundQuery& query) = 0;
};

/// z-value to class: beyond +/-0.5 gives 3/1, beyond +/-1.5 gives 4/0.
constexpr ClassLabel class_from_z(double z) {
  if (z < -1.5) return ClassLabel(0);
  if (z < -0.5) return ClassLabel(1);
  if (z > 1.5) return ClassLabel(4);
  if (z > 0.5) return ClassLabel(3);
  return ClassLabel(2);
}

/// An expert defined by a pure per-ticker rule.
class RuleExpert : public Expert {
 public:
  using Rule = std::function<ClassLabel(int round, const std::string& ticker, const FeatureVector& z)>;

  RuleExpert(std::string name, Rule rule) : name_(std::move(name)), rule_(std::move(rule)) {}

  const std::string& name() const override { return name_; }
  ExpertKind kind() const override { return ExpertKind::kBuiltin; }
  std::vector<Prediction> predict_round(const RoundQuery& query) override;

  ClassLabel predict(int round, const std::string& ticker, const FeatureVector& z) const {
    return rule_(round, ticker, z);
  }

 private:
  std::string name_;
  Rule rule_;
};

/// Names accepted by builtin_roster. An instance may carry an "@tag" suffix
/// (e.g. "seeded-random@3") so one rule can appear several times.
const std::vector<std::string>& builtin_names();

std::unique_ptr<RuleExpert> make_builtin(const std::string& name, std::uint64_t run_seed);
std::vector<std::unique_ptr<Expert>> builtin_roster(std::span<const std::string> names, std::uint64_t run_seed);

/// Per-round predictions of the whole roster.
struct RoundPredictions {
  int round = 0;
  Eigen::MatrixXi classes;  // experts x tickers
  std::vector<PredictionRecord> records;  // sorted by (expert, ticker)
};

/// The roster the engine queries. External experts are queried concurrently;
/// the call returns once every expert answered or ran out of time.
class ExpertPanel {
 public:
  ExpertPanel() = default;
  explicit ExpertPanel(std::vector<std::unique_ptr<Expert>> experts);

  void add(std::unique_ptr<Expert> expert);
  int size() const { return static_cast<int>(experts_.size()); }
  const Expert& at(int j) const { return *experts_.at(static_cast<std::size_t>(j)); }
  std::vector<ExpertId> ids() const;
  std::vector<std::string> names() const;

  RoundPredictions query(const RoundQuery& query);

 private:
  std::vector<std::unique_ptr<Expert>> experts_;
};

}  // namespace wme
