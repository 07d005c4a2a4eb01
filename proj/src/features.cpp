#include "wme/features.hpp"

#include <cmath>
#include <map>

#include "wme/error.hpp"
#include "wme/indicators.hpp"
#include "wme/io.hpp"

namespace wme {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "Open_n",
      "High_n",
      "Low_n",
      "Close_n",
      "Volume_n",
      "SMA_10",
      "SMA_20",
      "RSI_14",
      "BBL_5_2.0",
      "BBM_5_2.0",
      "BBU_5_2.0",
      "BBB_5_2.0",
      "BBP_5_2.0",
      "MACD_12_26_9",
      "MACDh_12_26_9",
      "MACDs_12_26_9",
      "VWAP_D",
      "MOM_30",
      "CMO_14",
      "High_n-Low_n",
      "Open_n-Close_n",
      "SMA_20-SMA_10",
      "Close_n_slope_3",
      "Close_n_slope_5",
      "Close_n_slope_10",
      "changelen_Open_n",
      "changelen_High_n",
      "changelen_Low_n",
      "changelen_Close_n",
      "changelen_High_n-Low_n",
      "changelen_Open_n-Close_n",
      "changelen_SMA_20-SMA_10",
  };
  return names;
}

namespace {

template <typename T>
void set_if(FeatureVector& v, Feature f, const std::optional<T>& x) {
  if (x) v.set(f, static_cast<double>(*x));
}

}  // namespace

FeatureVector build_feature_vector(const DayTimeline& tl, int ticker, int round) {
  if (round < 0 || round >= tl.rounds() || ticker < 0 || ticker >= tl.ticker_count())
    throw DataError("feature request outside the timeline");
  const Eigen::Index n = round + 1;
  const auto open = tl.open.col(ticker).head(n);
  const auto high = tl.high.col(ticker).head(n);
  const auto low = tl.low.col(ticker).head(n);
  const auto close = tl.close.col(ticker).head(n);

  FeatureVector v;
  v.set(kOpenN, open(round));
  v.set(kHighN, high(round));
  v.set(kLowN, low(round));
  v.set(kCloseN, close(round));
  v.set(kVolumeN, tl.volume(round, ticker));

  set_if(v, kSma10, ind::sma(close, 10));
  set_if(v, kSma20, ind::sma(close, 20));
  set_if(v, kRsi14, ind::rsi(close, 14));
  if (auto bb = ind::bollinger(close, 5, 2.0)) {
    v.set(kBbLower, bb->lower);
    v.set(kBbMiddle, bb->middle);
    v.set(kBbUpper, bb->upper);
    v.set(kBbBandwidth, bb->bandwidth);
    v.set(kBbPercent, bb->percent);
  }
  const auto m = ind::macd(close);
  set_if(v, kMacd, m.line);
  set_if(v, kMacdHist, m.histogram);
  set_if(v, kMacdSignal, m.signal);

  const Eigen::Index day0 = DayTimeline::day_start(round);
  const Eigen::Index day_len = round - day0 + 1;
  set_if(v, kVwapD,
         ind::vwap(high.segment(day0, day_len), low.segment(day0, day_len),
                   close.segment(day0, day_len), tl.volume.col(ticker).segment(day0, day_len)));

  set_if(v, kMom30, ind::momentum(close, 30));
  set_if(v, kCmo14, ind::cmo(close, 14));

  v.set(kHighMinusLow, high(round) - low(round));
  v.set(kOpenMinusClose, open(round) - close(round));
  if (v.is_valid(kSma10) && v.is_valid(kSma20)) v.set(kSma20MinusSma10, v[kSma20] - v[kSma10]);

  set_if(v, kCloseSlope3, ind::slope(close, 3));
  set_if(v, kCloseSlope5, ind::slope(close, 5));
  set_if(v, kCloseSlope10, ind::slope(close, 10));

  set_if(v, kChangelenOpen, ind::changelen(open));
  set_if(v, kChangelenHigh, ind::changelen(high));
  set_if(v, kChangelenLow, ind::changelen(low));
  set_if(v, kChangelenClose, ind::changelen(close));
  set_if(v, kChangelenHighMinusLow, ind::changelen(high - low));
  set_if(v, kChangelenOpenMinusClose, ind::changelen(open - close));

  // SMA_20 - SMA_10 exists from round 19; the streak needs two of them.
  if (n >= 21) {
    Eigen::VectorXd diff(n - 19);
    for (Eigen::Index r = 19; r < n; ++r)
      diff(r - 19) = *ind::sma(close.head(r + 1), 20) - *ind::sma(close.head(r + 1), 10);
    set_if(v, kChangelenSmaDiff, ind::changelen(diff));
  }
  return v;
}

FeatureTable build_feature_table(const DayTimeline& tl) {
  const int rounds = static_cast<int>(tl.rounds());
  const int tickers = static_cast<int>(tl.ticker_count());
  FeatureTable table(rounds, tickers);
  for (int t = 0; t < tickers; ++t)
    for (int r = 0; r < rounds; ++r) table.at(r, t) = build_feature_vector(tl, t, r);
  return table;
}

FeatureVector znormalize(const FeatureVector& v, const CalibrationStats& stats) {
  FeatureVector out;
  out.valid = v.valid;
  for (int i = 0; i < kFeatureCount; ++i)
    out.values(i) = v.valid.test(i) ? (v.values(i) - stats.mu(i)) / stats.sigma(i) : 0.0;
  return out;
}

FeatureTable znormalize(const FeatureTable& table, const CalibrationStats& stats) {
  FeatureTable out(table.rounds(), table.tickers());
  for (int r = 0; r < table.rounds(); ++r)
    for (int t = 0; t < table.tickers(); ++t) out.at(r, t) = znormalize(table.at(r, t), stats);
  return out;
}

CalibrationStats fit_calibration(std::span<const FeatureVector> rows) {
  using Vec = Eigen::Matrix<double, kFeatureCount, 1>;
  Vec sum = Vec::Zero();
  Eigen::Matrix<long, kFeatureCount, 1> count = Eigen::Matrix<long, kFeatureCount, 1>::Zero();
  for (const auto& row : rows)
    for (int i = 0; i < kFeatureCount; ++i)
      if (row.valid.test(i)) {
        sum(i) += row.values(i);
        ++count(i);
      }
  CalibrationStats stats;
  Vec sq = Vec::Zero();
  for (int i = 0; i < kFeatureCount; ++i) {
    if (count(i) < 2)
      throw CalibrationError("feature " + std::string(feature_names()[i]) + " has fewer than 2 valid values");
    stats.mu(i) = sum(i) / static_cast<double>(count(i));
  }
  for (const auto& row : rows)
    for (int i = 0; i < kFeatureCount; ++i)
      if (row.valid.test(i)) sq(i) += (row.values(i) - stats.mu(i)) * (row.values(i) - stats.mu(i));
  for (int i = 0; i < kFeatureCount; ++i) {
    stats.sigma(i) = std::sqrt(sq(i) / static_cast<double>(count(i)));
    if (!(stats.sigma(i) > 1e-12 * std::max(1.0, std::abs(stats.mu(i)))))
      throw CalibrationError("feature " + std::string(feature_names()[i]) + " has zero variance");
  }
  return stats;
}

std::string format_calibration(const CalibrationStats& stats) {
  std::string out = "feature,mu,sigma\n";
  for (int i = 0; i < kFeatureCount; ++i)
    out += std::string(feature_names()[i]) + ',' + io::format_double(stats.mu(i)) + ',' +
           io::format_double(stats.sigma(i)) + '\n';
  return out;
}

CalibrationStats parse_calibration(std::string_view csv) {
  std::map<std::string, std::pair<double, double>, std::less<>> rows;
  std::vector<std::string> order;
  std::size_t line_no = 0;
  bool header = false;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    auto nl = csv.find('\n', pos);
    auto line = io::trim(csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    ++line_no;
    if (!header) {
      if (line != "feature,mu,sigma") throw ParseError("expected header \"feature,mu,sigma\"", line_no);
      header = true;
      continue;
    }
    if (line.empty()) continue;
    auto f = io::split(line);
    double mu = 0, sigma = 0;
    if (f.size() != 3 || !io::parse_double(f[1], mu) || !io::parse_double(f[2], sigma))
      throw ParseError("malformed calibration row", line_no);
    if (!(sigma > 0)) throw ConfigError("sigma for " + std::string(f[0]) + " must be positive");
    order.emplace_back(io::trim(f[0]));
    rows[order.back()] = {mu, sigma};
  }
  CalibrationStats stats;
  for (int i = 0; i < kFeatureCount; ++i) {
    const auto name = feature_names()[i];
    if (i >= static_cast<int>(order.size()) || order[i] != name) {
      if (rows.find(name) == rows.end())
        throw ConfigError("calibration stats missing feature " + std::string(name));
      throw ConfigError("calibration stats out of schema order at " + std::string(name));
    }
    stats.mu(i) = rows[std::string(name)].first;
    stats.sigma(i) = rows[std::string(name)].second;
  }
  if (order.size() != static_cast<std::size_t>(kFeatureCount))
    throw ConfigError("calibration stats carry unknown features");
  return stats;
}

CalibrationStats load_calibration(const std::filesystem::path& path) {
  return parse_calibration(io::read_file(path));
}

}  // namespace wme
