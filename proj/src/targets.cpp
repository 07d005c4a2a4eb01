#include "wme/targets.hpp"

#include <algorithm>
#include <cmath>

#include "wme/error.hpp"
#include "wme/io.hpp"

namespace wme {
namespace {

std::atomic<std::uint64_t> g_violations{0};

double quantile_linear(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::optional<double> raw_return(const DayTimeline& tl, int ticker, int round) {
  if (round < 0 || round + kLabelDelay >= tl.rounds()) return std::nullopt;
  return tl.close(round + kLabelDelay, ticker) - tl.close(round, ticker);
}

BinEdges fit_bins(std::span<const double> returns) {
  std::vector<double> sorted(returns.begin(), returns.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> uniq = sorted;
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 5)
    throw CalibrationError("degenerate bins: need at least 5 distinct returns, got " + std::to_string(uniq.size()));
  BinEdges b;
  for (int i = 0; i < 4; ++i) b.edges[i] = quantile_linear(sorted, 0.2 * (i + 1));
  for (int i = 1; i < 4; ++i)
    if (!(b.edges[i] > b.edges[i - 1])) throw CalibrationError("degenerate bins: quantile edges coincide");
  return b;
}

ClassLabel discretize(double x, const BinEdges& edges) {
  int k = 0;
  for (double e : edges.edges)
    if (x > e) ++k;
  return ClassLabel(k);
}

std::string format_bins(const BinEdges& edges) {
  std::string out;
  for (double e : edges.edges) out += io::format_double(e) + '\n';
  return out;
}

BinEdges parse_bins(std::string_view text) {
  BinEdges b;
  int n = 0;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = io::trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (n == 4) throw ParseError("more than four bin edges", line_no);
    if (!io::parse_double(line, b.edges[n])) throw ParseError("bad bin edge", line_no);
    ++n;
  }
  if (n != 4) throw ParseError("expected four bin edges, got " + std::to_string(n), line_no);
  for (int i = 1; i < 4; ++i)
    if (!(b.edges[i] > b.edges[i - 1])) throw ConfigError("bin edges must be strictly increasing");
  return b;
}

BinEdges load_bins(const std::filesystem::path& path) { return parse_bins(io::read_file(path)); }

TruthStore::TruthStore(const DayTimeline& tl, const BinEdges& edges)
    : rounds_(static_cast<int>(tl.rounds())), tickers_(static_cast<int>(tl.ticker_count())) {
  raw_.assign(static_cast<std::size_t>(rounds_ * tickers_), std::nan(""));
  labels_.assign(static_cast<std::size_t>(rounds_ * tickers_), ClassLabel{});
  for (int r = 0; r < rounds_; ++r)
    for (int t = 0; t < tickers_; ++t)
      if (auto x = raw_return(tl, t, r)) {
        raw_[index(r, t)] = *x;
        labels_[index(r, t)] = discretize(*x, edges);
      }
}

void TruthStore::enter_training() {
  mode_ = TruthAccess::kTraining;
  clock_ = kCurrentDayStart;
}

void TruthStore::enter_inference(int engine_round) {
  mode_ = TruthAccess::kInference;
  clock_ = engine_round;
}

void TruthStore::check(int round, int ticker) const {
  if (ticker < 0 || ticker >= tickers_ || round < 0 || round >= rounds_)
    throw DataError("no ground truth for round " + std::to_string(round));
  const bool ok = mode_ == TruthAccess::kTraining ? round < kCurrentDayStart : round <= clock_ - kLabelDelay;
  if (!ok) {
    g_violations.fetch_add(1, std::memory_order_relaxed);
    throw CausalityError("truth for round " + std::to_string(round) + " read at engine round " +
                         std::to_string(clock_) +
                         (mode_ == TruthAccess::kTraining ? " in training mode" : " in inference mode"));
  }
  if (!has_label(round)) throw DataError("no ground truth for round " + std::to_string(round));
  ++reads_;
}

ClassLabel TruthStore::label(int round, int ticker) const {
  check(round, ticker);
  return labels_[index(round, ticker)];
}

double TruthStore::raw(int round, int ticker) const {
  check(round, ticker);
  return raw_[index(round, ticker)];
}

std::optional<ClassLabel> TruthStore::label_offline(int round, int ticker) const {
  if (ticker < 0 || ticker >= tickers_ || !has_label(round)) return std::nullopt;
  return labels_[index(round, ticker)];
}

std::optional<double> TruthStore::raw_offline(int round, int ticker) const {
  if (ticker < 0 || ticker >= tickers_ || !has_label(round)) return std::nullopt;
  return raw_[index(round, ticker)];
}

std::uint64_t TruthStore::global_violations() { return g_violations.load(); }

std::string TruthStore::format_csv(const std::vector<std::string>& tickers) const {
  std::string out = "round,ticker,raw_return,class\n";
  for (int r = 0; r < rounds_; ++r) {
    if (!has_label(r)) continue;
    for (int t = 0; t < tickers_; ++t)
      out += std::to_string(r) + ',' + tickers.at(static_cast<std::size_t>(t)) + ',' +
             io::format_double(raw_[index(r, t)]) + ',' + std::to_string(labels_[index(r, t)].value()) + '\n';
  }
  return out;
}

}  // namespace wme
