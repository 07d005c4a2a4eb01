#include "wme/market_data.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "wme/error.hpp"
#include "wme/io.hpp"

namespace wme {
namespace {

constexpr std::string_view kDayHeader = "ticker,round_in_day,open,high,low,close,volume";
constexpr std::string_view kTimelineHeader = "ticker,round,open_n,high_n,low_n,close_n,volume_n";

// Calls fn(line_number, line) for each non-blank line after the header.
template <typename Fn>
void for_each_row(std::string_view csv, std::string_view header, Fn&& fn) {
  std::size_t line_no = 0;
  bool seen_header = false;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    auto nl = csv.find('\n', pos);
    auto line = csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? csv.size() + 1 : nl + 1;
    line = io::trim(line);
    if (!seen_header) {
      if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      if (line != header) throw ParseError("expected header \"" + std::string(header) + "\"", line_no);
      seen_header = true;
      continue;
    }
    if (line.empty()) continue;
    fn(line_no, line);
  }
  if (!seen_header) throw ParseError("empty file", 1);
}

double field_double(std::string_view f, const char* name, std::size_t line) {
  double v = 0;
  if (!io::parse_double(f, v)) throw ParseError(std::string("bad ") + name + " \"" + std::string(f) + "\"", line);
  return v;
}

std::int64_t field_int(std::string_view f, const char* name, std::size_t line) {
  std::int64_t v = 0;
  if (!io::parse_int(f, v)) throw ParseError(std::string("bad ") + name + " \"" + std::string(f) + "\"", line);
  return v;
}

}  // namespace

std::optional<int> DayTimeline::find_ticker(std::string_view name) const {
  auto it = std::find(tickers.begin(), tickers.end(), name);
  if (it == tickers.end()) return std::nullopt;
  return static_cast<int>(it - tickers.begin());
}

NormalizedCandle DayTimeline::candle(int round, int ticker) const {
  return {tickers.at(static_cast<std::size_t>(ticker)), round,
          open(round, ticker),  high(round, ticker),
          low(round, ticker),   close(round, ticker),
          volume(round, ticker)};
}

std::vector<Candle> parse_day(std::string_view csv, int day_index) {
  if (day_index < 0) throw ConfigError("day_index must be non-negative");
  std::vector<Candle> out;
  std::set<std::pair<int, std::string>, std::less<>> seen;
  for_each_row(csv, kDayHeader, [&](std::size_t line, std::string_view row) {
    auto f = io::split(row);
    if (f.size() != 7) throw ParseError("expected 7 fields, got " + std::to_string(f.size()), line);
    Candle c;
    c.ticker = std::string(io::trim(f[0]));
    if (c.ticker.empty()) throw ParseError("empty ticker", line);
    auto rid = field_int(f[1], "round_in_day", line);
    if (rid < 0 || rid >= kRoundsPerDay) throw ParseError("round_in_day out of range [0,74]", line);
    c.open = field_double(f[2], "open", line);
    c.high = field_double(f[3], "high", line);
    c.low = field_double(f[4], "low", line);
    c.close = field_double(f[5], "close", line);
    c.volume = field_int(f[6], "volume", line);
    if (!(c.open > 0 && c.high > 0 && c.low > 0 && c.close > 0))
      throw ParseError("prices must be positive", line);
    if (c.volume < 0) throw ParseError("volume must be non-negative", line);
    if (c.low > std::min(c.open, c.close) || c.high < std::max(c.open, c.close))
      throw ParseError("inconsistent OHLC (low/high do not bracket open/close)", line);
    if (!seen.emplace(static_cast<int>(rid), c.ticker).second)
      throw DuplicateError("line " + std::to_string(line) + ": duplicate candle at round_in_day " +
                           std::to_string(rid) + " for ticker \"" + c.ticker + "\"");
    c.round = static_cast<int>(rid) + kRoundsPerDay * day_index;
    out.push_back(std::move(c));
  });

  std::set<std::string, std::less<>> tickers;
  for (const auto& c : out) tickers.insert(c.ticker);
  if (tickers.empty()) throw DataError("day file has no candles");
  for (int r = 0; r < kRoundsPerDay; ++r)
    for (const auto& t : tickers)
      if (!seen.contains(std::pair<int, std::string>(r, t))) throw GapError(r, t);

  std::sort(out.begin(), out.end(), [](const Candle& a, const Candle& b) {
    return std::tie(a.round, a.ticker) < std::tie(b.round, b.ticker);
  });
  return out;
}

std::vector<Candle> load_day(const std::filesystem::path& path, int day_index) {
  auto text = io::read_file(path);
  try {
    return parse_day(text, day_index);
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), path.string());
  }
}

std::string format_day(std::span<const Candle> candles) {
  std::string out(kDayHeader);
  out += '\n';
  for (const auto& c : candles) {
    out += c.ticker;
    out += ',' + std::to_string(c.round % kRoundsPerDay);
    out += ',' + io::format_double(c.open);
    out += ',' + io::format_double(c.high);
    out += ',' + io::format_double(c.low);
    out += ',' + io::format_double(c.close);
    out += ',' + std::to_string(c.volume);
    out += '\n';
  }
  return out;
}

DayTimeline normalize_days(std::span<const std::vector<Candle>> days,
                           const VolumeBaseline& volume_baseline) {
  if (days.empty()) throw DataError("no days to normalize");
  DayTimeline tl;
  {
    std::set<std::string, std::less<>> names;
    for (const auto& c : days.front()) names.insert(c.ticker);
    tl.tickers.assign(names.begin(), names.end());
  }
  const auto m = static_cast<Eigen::Index>(tl.tickers.size());
  const auto rounds = static_cast<Eigen::Index>(days.size()) * kRoundsPerDay;
  if (m == 0) throw DataError("day has no candles");
  for (const auto& t : tl.tickers) {
    auto it = volume_baseline.find(t);
    if (it == volume_baseline.end()) throw DataError("volume baseline missing ticker \"" + t + "\"");
    if (!(it->second > 0)) throw DataError("volume baseline for \"" + t + "\" must be positive");
  }
  tl.open.setZero(rounds, m);
  tl.high.setZero(rounds, m);
  tl.low.setZero(rounds, m);
  tl.close.setZero(rounds, m);
  tl.volume.setZero(rounds, m);

  for (std::size_t d = 0; d < days.size(); ++d) {
    const auto& day = days[d];
    if (static_cast<Eigen::Index>(day.size()) != m * kRoundsPerDay)
      throw DataError("day " + std::to_string(d) + " has " + std::to_string(day.size()) +
                      " candles, expected " + std::to_string(m * kRoundsPerDay));
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> filled =
        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(kRoundsPerDay, m, false);
    const auto base = static_cast<Eigen::Index>(d) * kRoundsPerDay;
    for (const auto& c : day) {
      auto t = tl.find_ticker(c.ticker);
      if (!t) throw DataError("ticker \"" + c.ticker + "\" absent from the first day");
      const int rid = c.round % kRoundsPerDay;
      if (filled(rid, *t)) throw DuplicateError("duplicate candle for \"" + c.ticker + "\"");
      filled(rid, *t) = true;
      tl.open(base + rid, *t) = c.open;
      tl.high(base + rid, *t) = c.high;
      tl.low(base + rid, *t) = c.low;
      tl.close(base + rid, *t) = c.close;
      tl.volume(base + rid, *t) = static_cast<double>(c.volume);
    }
    if (!filled.all()) throw DataError("day " + std::to_string(d) + " is incomplete");

    for (Eigen::Index t = 0; t < m; ++t) {
      const double normalizer = tl.close(base, t);
      if (!(normalizer > 0))
        throw DegeneratePriceError("first close of \"" + tl.tickers[t] + "\" is not positive");
      auto rows = Eigen::seqN(base, kRoundsPerDay);
      tl.open(rows, t) /= normalizer;
      tl.high(rows, t) /= normalizer;
      tl.low(rows, t) /= normalizer;
      tl.close(rows, t) /= normalizer;
      tl.volume(rows, t) /= volume_baseline.find(tl.tickers[t])->second;
    }
  }
  return tl;
}

DayTimeline normalize_timeline(const std::vector<Candle>& prev, const std::vector<Candle>& curr,
                               const VolumeBaseline& volume_baseline) {
  const std::vector<Candle> both[] = {prev, curr};
  return normalize_days(both, volume_baseline);
}

VolumeBaseline fit_volume_baseline(std::span<const std::vector<Candle>> days) {
  std::map<std::string, std::pair<double, std::size_t>, std::less<>> acc;
  for (const auto& day : days)
    for (const auto& c : day) {
      auto& [sum, n] = acc[c.ticker];
      sum += static_cast<double>(c.volume);
      ++n;
    }
  VolumeBaseline out;
  for (const auto& [t, sn] : acc) {
    const double mean = sn.first / static_cast<double>(sn.second);
    if (!(mean > 0)) throw CalibrationError("ticker \"" + t + "\" has zero mean volume");
    out.emplace(t, mean);
  }
  return out;
}

VolumeBaseline parse_volume_baseline(std::string_view csv) {
  VolumeBaseline out;
  for_each_row(csv, "ticker,mean_volume", [&](std::size_t line, std::string_view row) {
    auto f = io::split(row);
    if (f.size() != 2) throw ParseError("expected 2 fields", line);
    double v = field_double(f[1], "mean_volume", line);
    if (!(v > 0)) throw ParseError("mean_volume must be positive", line);
    if (!out.emplace(std::string(io::trim(f[0])), v).second)
      throw DuplicateError("duplicate ticker in volume baseline");
  });
  return out;
}

VolumeBaseline load_volume_baseline(const std::filesystem::path& path) {
  return parse_volume_baseline(io::read_file(path));
}

std::string format_volume_baseline(const VolumeBaseline& baseline) {
  std::string out = "ticker,mean_volume\n";
  for (const auto& [t, v] : baseline) out += t + ',' + io::format_double(v) + '\n';
  return out;
}

std::string format_timeline(const DayTimeline& tl) {
  std::string out(kTimelineHeader);
  out += '\n';
  for (Eigen::Index r = 0; r < tl.rounds(); ++r)
    for (Eigen::Index t = 0; t < tl.ticker_count(); ++t) {
      out += tl.tickers[t];
      out += ',' + std::to_string(r);
      for (const auto* m : {&tl.open, &tl.high, &tl.low, &tl.close, &tl.volume})
        out += ',' + io::format_double((*m)(r, t));
      out += '\n';
    }
  return out;
}

DayTimeline parse_timeline(std::string_view csv) {
  struct Row {
    std::string ticker;
    Eigen::Index round;
    double v[5];
  };
  std::vector<Row> rows;
  std::set<std::string, std::less<>> names;
  Eigen::Index max_round = -1;
  for_each_row(csv, kTimelineHeader, [&](std::size_t line, std::string_view text) {
    auto f = io::split(text);
    if (f.size() != 7) throw ParseError("expected 7 fields", line);
    Row r;
    r.ticker = std::string(io::trim(f[0]));
    r.round = field_int(f[1], "round", line);
    if (r.round < 0) throw ParseError("negative round", line);
    for (int i = 0; i < 5; ++i) r.v[i] = field_double(f[2 + i], "value", line);
    names.insert(r.ticker);
    max_round = std::max(max_round, r.round);
    rows.push_back(std::move(r));
  });
  DayTimeline tl;
  tl.tickers.assign(names.begin(), names.end());
  const auto n = max_round + 1;
  const auto m = static_cast<Eigen::Index>(tl.tickers.size());
  if (n % kRoundsPerDay != 0 || static_cast<Eigen::Index>(rows.size()) != n * m)
    throw DataError("timeline CSV is not a complete set of whole days");
  for (auto* mat : {&tl.open, &tl.high, &tl.low, &tl.close, &tl.volume}) mat->setZero(n, m);
  for (const auto& r : rows) {
    auto t = *tl.find_ticker(r.ticker);
    tl.open(r.round, t) = r.v[0];
    tl.high(r.round, t) = r.v[1];
    tl.low(r.round, t) = r.v[2];
    tl.close(r.round, t) = r.v[3];
    tl.volume(r.round, t) = r.v[4];
  }
  return tl;
}

}  // namespace wme
