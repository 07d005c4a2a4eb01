#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "wme/market_data.hpp"

namespace wme {

inline constexpr int kClassCount = 5;
inline constexpr int kNeutralClass = 2;
/// Rounds until a round's 10-candle return is observable.
inline constexpr int kLabelDelay = 10;

/// Ordinal bin of the 10-candle return: 0 extreme fall ... 4 extreme rise.
class ClassLabel {
 public:
  constexpr ClassLabel() = default;
  constexpr explicit ClassLabel(int value) : value_(value) {
    if (value < 0 || value >= kClassCount) throw std::out_of_range("class label outside 0-4");
  }
  constexpr int value() const { return value_; }
  constexpr bool is_extreme() const { return value_ == 0 || value_ == kClassCount - 1; }
  /// The {0, 0.25, 0.5, 0.75, 1} encoding.
  constexpr double unit() const { return value_ / 4.0; }
  friend constexpr bool operator==(ClassLabel, ClassLabel) = default;
  friend constexpr auto operator<=>(ClassLabel, ClassLabel) = default;

 private:
  int value_ = kNeutralClass;
};

/// Four strictly increasing thresholds e1 < e2 < e3 < e4.
struct BinEdges {
  std::array<double, 4> edges{};
};

/// close_n[r + 10] - close_n[r]; nullopt when r + 10 is past the timeline.
std::optional<double> raw_return(const DayTimeline& timeline, int ticker, int round);

/// Edges at the 20/40/60/80th linear-interpolated percentiles.
BinEdges fit_bins(std::span<const double> returns);

/// Class k with x in (e_k, e_{k+1}]; a value on an edge takes the lower class.
ClassLabel discretize(double x, const BinEdges& edges);

std::string format_bins(const BinEdges& edges);
BinEdges parse_bins(std::string_view text);
BinEdges load_bins(const std::filesystem::path& path);

enum class TruthAccess { kTraining, kInference };

/// Ground-truth labels keyed by (round, ticker) with an availability audit.
///
/// In training mode every previous-day label (rounds < 75) is readable. In
/// inference mode at engine round rho only rounds <= rho - 10 are readable;
/// any other read throws CausalityError and is counted process-wide.
class TruthStore {
 public:
  TruthStore() = default;
  TruthStore(const DayTimeline& timeline, const BinEdges& edges);

  int rounds() const { return rounds_; }
  int tickers() const { return tickers_; }
  bool has_label(int round) const { return round >= 0 && round + kLabelDelay < rounds_; }

  void enter_training();
  void enter_inference(int engine_round);
  TruthAccess mode() const { return mode_; }
  int clock() const { return clock_; }

  /// Audited read.
  ClassLabel label(int round, int ticker) const;
  double raw(int round, int ticker) const;

  /// Unaudited read for offline evaluation after a replay finishes.
  std::optional<ClassLabel> label_offline(int round, int ticker) const;
  std::optional<double> raw_offline(int round, int ticker) const;

  std::uint64_t reads() const { return reads_; }
  static std::uint64_t global_violations();

  /// round,ticker,raw_return,class for every labelled cell.
  std::string format_csv(const std::vector<std::string>& tickers) const;

 private:
  void check(int round, int ticker) const;
  std::size_t index(int round, int ticker) const {
    return static_cast<std::size_t>(round) * static_cast<std::size_t>(tickers_) + static_cast<std::size_t>(ticker);
  }

  int rounds_ = 0;
  int tickers_ = 0;
  std::vector<double> raw_;
  std::vector<ClassLabel> labels_;
  TruthAccess mode_ = TruthAccess::kTraining;
  int clock_ = kCurrentDayStart;
  mutable std::uint64_t reads_ = 0;
};

}  // namespace wme
