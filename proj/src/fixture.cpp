#include "wme/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wme/error.hpp"
#include "wme/io.hpp"
#include "wme/seed.hpp"

namespace wme {

std::vector<std::vector<Candle>> generate_fixture(const FixtureParams& p) {
  if (p.tickers < 1 || p.tickers > 702) throw ConfigError("fixture tickers must be in [1, 702]");
  if (p.days < 1) throw ConfigError("fixture days must be >= 1");
  if (!(p.noise >= 0)) throw ConfigError("fixture noise must be non-negative");
  if (!(p.base_volume > 0)) throw ConfigError("fixture base volume must be positive");

  std::vector<std::vector<Candle>> days(static_cast<std::size_t>(p.days));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < p.tickers; ++t) {
    std::string name;
    if (t < 26) {
      name = std::string(1, static_cast<char>('A' + t));
    } else {
      name = std::string(1, static_cast<char>('A' + t / 26 - 1)) + static_cast<char>('A' + t % 26);
    }
    std::mt19937_64 rng(child_seed(p.seed, "fixture/" + name));
    double close = 50.0 + 450.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (int d = 0; d < p.days; ++d) {
      for (int r = 0; r < kRoundsPerDay; ++r) {
        const int global = d * kRoundsPerDay + r;
        const double drift = (p.regime_shift >= 0 && global >= p.regime_shift) ? -p.trend : p.trend;
        const double gap = r == 0 ? 0.3 * p.noise * gauss(rng) : 0.1 * p.noise * gauss(rng);
        Candle c;
        c.ticker = name;
        c.round = r;
        c.open = close * std::exp(gap);
        c.close = c.open * std::exp(drift + p.noise * gauss(rng));
        c.high = std::max(c.open, c.close) * std::exp(0.5 * p.noise * std::abs(gauss(rng)));
        c.low = std::min(c.open, c.close) * std::exp(-0.5 * p.noise * std::abs(gauss(rng)));
        c.volume = static_cast<std::int64_t>(std::llround(p.base_volume * std::exp(0.4 * gauss(rng))));
        close = c.close;
        days[static_cast<std::size_t>(d)].push_back(std::move(c));
      }
    }
  }
  for (auto& day : days)
    std::sort(day.begin(), day.end(),
              [](const Candle& a, const Candle& b) { return std::tie(a.round, a.ticker) < std::tie(b.round, b.ticker); });
  return days;
}

std::vector<std::filesystem::path> write_fixture(const FixtureParams& params, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  const auto days = generate_fixture(params);
  for (std::size_t d = 0; d < days.size(); ++d) {
    auto path = dir / ("day" + std::to_string(d) + ".csv");
    io::write_file_atomic(path, format_day(days[d]));
    out.push_back(path);
  }
  return out;
}

}  // namespace wme
