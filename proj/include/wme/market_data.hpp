#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wme {

inline constexpr int kRoundsPerDay = 75;
inline constexpr int kTimelineRounds = 2 * kRoundsPerDay;
/// First round of the current (live) day.
inline constexpr int kCurrentDayStart = kRoundsPerDay;

/// One raw 5-minute OHLCV bar. `round` is offset by 75 per day (0-149 for a pair).
struct Candle {
  std::string ticker;
  int round = 0;
  double open = 0, high = 0, low = 0, close = 0;
  std::int64_t volume = 0;
};

struct NormalizedCandle {
  std::string ticker;
  int round = 0;
  double open_n = 0, high_n = 0, low_n = 0, close_n = 0, volume_n = 0;
};

/// ticker -> mean per-candle volume on the calibration split.
using VolumeBaseline = std::map<std::string, double, std::less<>>;

/// Normalized prices for consecutive trading days, stored column-per-ticker.
/// Every matrix is rounds() x ticker_count(); row r is round r.
struct DayTimeline {
  std::vector<std::string> tickers;
  Eigen::MatrixXd open, high, low, close, volume;

  Eigen::Index rounds() const { return close.rows(); }
  Eigen::Index ticker_count() const { return close.cols(); }
  int days() const { return static_cast<int>(rounds() / kRoundsPerDay); }
  static int day_start(int round) { return round - round % kRoundsPerDay; }

  std::optional<int> find_ticker(std::string_view name) const;
  NormalizedCandle candle(int round, int ticker) const;
};

/// Parses one day file. Rounds are offset by 75 * day_index; output is
/// sorted by (round, ticker).
std::vector<Candle> parse_day(std::string_view csv, int day_index);
std::vector<Candle> load_day(const std::filesystem::path& path, int day_index);
std::string format_day(std::span<const Candle> candles);

/// Normalizes each day by its own first close and volume by the baseline.
DayTimeline normalize_days(std::span<const std::vector<Candle>> days,
                           const VolumeBaseline& volume_baseline);
DayTimeline normalize_timeline(const std::vector<Candle>& prev,
                               const std::vector<Candle>& curr,
                               const VolumeBaseline& volume_baseline);

VolumeBaseline fit_volume_baseline(std::span<const std::vector<Candle>> days);
VolumeBaseline parse_volume_baseline(std::string_view csv);
VolumeBaseline load_volume_baseline(const std::filesystem::path& path);
std::string format_volume_baseline(const VolumeBaseline& baseline);

/// Normalized timeline as CSV: ticker,round,open_n,high_n,low_n,close_n,volume_n.
/// Values are written in shortest round-trip form.
std::string format_timeline(const DayTimeline& timeline);
DayTimeline parse_timeline(std::string_view csv);

}  // namespace wme
