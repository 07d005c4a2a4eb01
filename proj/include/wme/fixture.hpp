#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wme/market_data.hpp"

namespace wme {

/// Synthetic intraday candles: per-ticker geometric random walk with a
/// drift that can flip sign at a regime-shift round.
struct FixtureParams {
  int tickers = 8;
  int days = 2;
  std::uint64_t seed = 1;
  double trend = 0.0;       // drift of the log close per round
  double noise = 0.002;     // per-round log-return volatility
  int regime_shift = -1;    // global round at which the drift flips; -1 never
  double base_volume = 10000;
};

/// One vector of candles per day, rounds day-local (0-74).
std::vector<std::vector<Candle>> generate_fixture(const FixtureParams& params);

/// Writes day0.csv, day1.csv, ... into dir; returns the paths.
std::vector<std::filesystem::path> write_fixture(const FixtureParams& params, const std::filesystem::path& dir);

}  // namespace wme
