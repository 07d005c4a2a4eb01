#pragma once

// Rolling technical indicators over a price history.
//
// Every function takes the history up to and including the current round
// as an Eigen vector expression (oldest first) and returns std::nullopt
// when the history is too short for the indicator.

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>

namespace wme::ind {

template <typename Derived>
using scalar_t = typename Derived::Scalar;

template <typename Derived>
std::optional<scalar_t<Derived>> sma(const Eigen::DenseBase<Derived>& series, Eigen::Index k) {
  if (k < 1 || series.size() < k) return std::nullopt;
  return series.tail(k).mean();
}

/// Simple-average RSI over the last k deltas. Flat history reads 50.
template <typename Derived>
std::optional<scalar_t<Derived>> rsi(const Eigen::DenseBase<Derived>& series, Eigen::Index k = 14) {
  using S = scalar_t<Derived>;
  if (k < 1 || series.size() < k + 1) return std::nullopt;
  const auto tail = series.tail(k + 1);
  const Eigen::Array<S, Eigen::Dynamic, 1> delta = (tail.tail(k) - tail.head(k)).array();
  const S gains = delta.cwiseMax(S(0)).sum() / S(k);
  const S losses = (-delta).cwiseMax(S(0)).sum() / S(k);
  if (gains == S(0) && losses == S(0)) return S(50);
  if (losses == S(0)) return S(100);
  return S(100) - S(100) / (S(1) + gains / losses);
}

template <typename S>
struct Bollinger {
  S lower, middle, upper, bandwidth, percent;
};

/// Bollinger bands with population standard deviation. %B is 0.5 on a
/// collapsed band.
template <typename Derived>
std::optional<Bollinger<scalar_t<Derived>>> bollinger(const Eigen::DenseBase<Derived>& series,
                                                      Eigen::Index k = 5,
                                                      scalar_t<Derived> mult = 2) {
  using S = scalar_t<Derived>;
  if (k < 1 || series.size() < k) return std::nullopt;
  const auto tail = series.tail(k);
  const S last = tail(k - 1);
  if (tail.maxCoeff() == tail.minCoeff()) return Bollinger<S>{last, last, last, S(0), S(0.5)};
  const S mid = tail.mean();
  const S sd = std::sqrt((tail.array() - mid).square().mean());
  const S lo = mid - mult * sd;
  const S hi = mid + mult * sd;
  const S width = mid != S(0) ? (hi - lo) / mid : S(0);
  const S pct = hi != lo ? (last - lo) / (hi - lo) : S(0.5);
  return Bollinger<S>{lo, mid, hi, width, pct};
}

/// SMA-seeded exponential moving average of the whole series; entries
/// before index k-1 are NaN.
template <typename Derived>
Eigen::Matrix<scalar_t<Derived>, Eigen::Dynamic, 1> ema_series(const Eigen::DenseBase<Derived>& series,
                                                                Eigen::Index k) {
  using S = scalar_t<Derived>;
  const Eigen::Index n = series.size();
  Eigen::Matrix<S, Eigen::Dynamic, 1> out =
      Eigen::Matrix<S, Eigen::Dynamic, 1>::Constant(n, std::numeric_limits<S>::quiet_NaN());
  if (k < 1 || n < k) return out;
  const S alpha = S(2) / S(k + 1);
  out(k - 1) = series.head(k).mean();
  for (Eigen::Index i = k; i < n; ++i) out(i) = alpha * series(i) + (S(1) - alpha) * out(i - 1);
  return out;
}

template <typename S>
struct Macd {
  std::optional<S> line, signal, histogram;
};

inline constexpr Eigen::Index kMacdFast = 12;
inline constexpr Eigen::Index kMacdSlow = 26;
inline constexpr Eigen::Index kMacdSignal = 9;

/// MACD(12, 26, 9). The line needs 26 values; the signal (an SMA-seeded
/// EMA of the line) needs 9 line values, i.e. 34 prices.
template <typename Derived>
Macd<scalar_t<Derived>> macd(const Eigen::DenseBase<Derived>& series) {
  using S = scalar_t<Derived>;
  Macd<S> out;
  const Eigen::Index n = series.size();
  if (n < kMacdSlow) return out;
  const auto fast = ema_series(series, kMacdFast);
  const auto slow = ema_series(series, kMacdSlow);
  const Eigen::Matrix<S, Eigen::Dynamic, 1> line = (fast - slow).tail(n - kMacdSlow + 1);
  out.line = line(line.size() - 1);
  if (line.size() >= kMacdSignal) {
    const auto sig = ema_series(line, kMacdSignal);
    out.signal = sig(sig.size() - 1);
    out.histogram = *out.line - *out.signal;
  }
  return out;
}

/// Volume-weighted typical price over one day's rounds so far. Falls back to
/// the plain mean typical price when no volume has traded.
template <typename H, typename L, typename C, typename V>
std::optional<scalar_t<C>> vwap(const Eigen::DenseBase<H>& high, const Eigen::DenseBase<L>& low,
                                const Eigen::DenseBase<C>& close, const Eigen::DenseBase<V>& volume) {
  using S = scalar_t<C>;
  if (close.size() == 0) return std::nullopt;
  const Eigen::Array<S, Eigen::Dynamic, 1> typical =
      (high.derived().array() + low.derived().array() + close.derived().array()) / S(3);
  const S vol = volume.sum();
  if (vol == S(0)) return typical.mean();
  return (typical * volume.derived().array()).sum() / vol;
}

template <typename Derived>
std::optional<scalar_t<Derived>> momentum(const Eigen::DenseBase<Derived>& series, Eigen::Index k = 30) {
  const Eigen::Index n = series.size();
  if (k < 1 || n < k + 1) return std::nullopt;
  return series(n - 1) - series(n - 1 - k);
}

/// Chande momentum oscillator over the last k deltas; 0 on a flat history.
template <typename Derived>
std::optional<scalar_t<Derived>> cmo(const Eigen::DenseBase<Derived>& series, Eigen::Index k = 14) {
  using S = scalar_t<Derived>;
  if (k < 1 || series.size() < k + 1) return std::nullopt;
  const auto tail = series.tail(k + 1);
  const Eigen::Array<S, Eigen::Dynamic, 1> delta = (tail.tail(k) - tail.head(k)).array();
  const S up = delta.cwiseMax(S(0)).sum();
  const S down = (-delta).cwiseMax(S(0)).sum();
  if (up + down == S(0)) return S(0);
  return S(100) * (up - down) / (up + down);
}

/// Least-squares slope of the last k values against x = 0..k-1.
template <typename Derived>
std::optional<scalar_t<Derived>> slope(const Eigen::DenseBase<Derived>& series, Eigen::Index k) {
  using S = scalar_t<Derived>;
  if (k < 2 || series.size() < k) return std::nullopt;
  const Eigen::Array<S, Eigen::Dynamic, 1> x =
      Eigen::Array<S, Eigen::Dynamic, 1>::LinSpaced(k, S(0), S(k - 1)) - S(k - 1) / S(2);
  return (x * series.tail(k).derived().array()).sum() / x.square().sum();
}

/// Steps smaller than this count as flat in changelen; normalized values
/// are O(1), so only rounding noise falls below it.
inline constexpr double kFlatStep = 1e-12;

/// Signed length of the strict monotone streak ending at the last value:
/// +k for k rising steps, -k for k falling steps, 0 if the last step is flat.
template <typename Derived>
std::optional<int> changelen(const Eigen::DenseBase<Derived>& series) {
  const Eigen::Index n = series.size();
  if (n < 2) return std::nullopt;
  const auto step = [&](Eigen::Index i) {
    const double d = static_cast<double>(series(i) - series(i - 1));
    return (d > kFlatStep) - (d < -kFlatStep);
  };
  const int dir = step(n - 1);
  if (dir == 0) return 0;
  int len = 0;
  for (Eigen::Index i = n - 1; i >= 1 && step(i) == dir; --i) ++len;
  return dir * len;
}

}  // namespace wme::ind
