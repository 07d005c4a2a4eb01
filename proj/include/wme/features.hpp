#pragma once

#include <Eigen/Core>
#include <array>
#include <bitset>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wme/market_data.hpp"

namespace wme {

/// Fixed feature schema; the enumerator order is the vector order.
enum Feature : int {
  kOpenN,
  kHighN,
  kLowN,
  kCloseN,
  kVolumeN,
  kSma10,
  kSma20,
  kRsi14,
  kBbLower,
  kBbMiddle,
  kBbUpper,
  kBbBandwidth,
  kBbPercent,
  kMacd,
  kMacdHist,
  kMacdSignal,
  kVwapD,
  kMom30,
  kCmo14,
  kHighMinusLow,
  kOpenMinusClose,
  kSma20MinusSma10,
  kCloseSlope3,
  kCloseSlope5,
  kCloseSlope10,
  kChangelenOpen,
  kChangelenHigh,
  kChangelenLow,
  kChangelenClose,
  kChangelenHighMinusLow,
  kChangelenOpenMinusClose,
  kChangelenSmaDiff,
  kFeatureCount
};

/// Column names, in schema order.
const std::array<std::string_view, kFeatureCount>& feature_names();

struct FeatureVector {
  Eigen::Matrix<double, kFeatureCount, 1> values = Eigen::Matrix<double, kFeatureCount, 1>::Zero();
  std::bitset<kFeatureCount> valid;

  double operator[](Feature f) const { return values(f); }
  bool is_valid(Feature f) const { return valid.test(f); }
  void set(Feature f, double v) {
    values(f) = v;
    valid.set(f);
  }
};

struct CalibrationStats {
  Eigen::Matrix<double, kFeatureCount, 1> mu = Eigen::Matrix<double, kFeatureCount, 1>::Zero();
  Eigen::Matrix<double, kFeatureCount, 1> sigma = Eigen::Matrix<double, kFeatureCount, 1>::Ones();
};

/// Features for one (round, ticker). Rolling indicators draw on the whole
/// timeline history up to `round`; VWAP restarts at each day boundary.
FeatureVector build_feature_vector(const DayTimeline& timeline, int ticker, int round);

/// Raw (un-normalized) features for every round and ticker, indexed
/// [round * ticker_count + ticker].
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(int rounds, int tickers) : rounds_(rounds), tickers_(tickers), rows_(rounds * tickers) {}

  int rounds() const { return rounds_; }
  int tickers() const { return tickers_; }
  FeatureVector& at(int round, int ticker) { return rows_.at(index(round, ticker)); }
  const FeatureVector& at(int round, int ticker) const { return rows_.at(index(round, ticker)); }
  std::span<const FeatureVector> rows() const { return rows_; }

 private:
  std::size_t index(int round, int ticker) const {
    return static_cast<std::size_t>(round) * static_cast<std::size_t>(tickers_) + static_cast<std::size_t>(ticker);
  }
  int rounds_ = 0;
  int tickers_ = 0;
  std::vector<FeatureVector> rows_;
};

FeatureTable build_feature_table(const DayTimeline& timeline);

/// Valid slots become (x - mu) / sigma; invalid slots become 0 and keep
/// their cleared flag.
FeatureVector znormalize(const FeatureVector& v, const CalibrationStats& stats);
FeatureTable znormalize(const FeatureTable& table, const CalibrationStats& stats);

/// Per-slot mean and population sigma over valid entries.
CalibrationStats fit_calibration(std::span<const FeatureVector> rows);

std::string format_calibration(const CalibrationStats& stats);
CalibrationStats parse_calibration(std::string_view csv);
CalibrationStats load_calibration(const std::filesystem::path& path);

}  // namespace wme
