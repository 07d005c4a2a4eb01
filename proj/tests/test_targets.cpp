#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "wme/error.hpp"
#include "wme/targets.hpp"

namespace wme {
namespace {

DayTimeline flat_timeline(int tickers = 1) {
  DayTimeline tl;
  for (int t = 0; t < tickers; ++t) tl.tickers.push_back("T" + std::to_string(t));
  for (auto* m : {&tl.open, &tl.high, &tl.low, &tl.close, &tl.volume}) m->setOnes(kTimelineRounds, tickers);
  return tl;
}

const BinEdges kEdges{{-0.02, -0.01, 0.01, 0.02}};

TEST(RawReturn, Examples) {
  auto tl = flat_timeline();
  EXPECT_EQ(*raw_return(tl, 0, 30), 0.0);
  tl.close(40, 0) = 1.02;
  EXPECT_NEAR(*raw_return(tl, 0, 30), 0.02, 1e-15);
  EXPECT_TRUE(raw_return(tl, 0, 139));
  EXPECT_FALSE(raw_return(tl, 0, 140));
}

TEST(FitBins, FiveValuesOnePerBin) {
  const std::vector<double> xs{-0.2, -0.1, 0.0, 0.1, 0.2};
  const auto edges = fit_bins(xs);
  std::array<int, 5> counts{};
  for (double x : xs) ++counts[discretize(x, edges).value()];
  EXPECT_EQ(counts, (std::array<int, 5>{1, 1, 1, 1, 1}));
}

TEST(FitBins, LinearInterpolatedQuantiles) {
  std::vector<double> xs;
  for (int i = 0; i <= 10; ++i) xs.push_back(i);
  const auto edges = fit_bins(xs);
  EXPECT_DOUBLE_EQ(edges.edges[0], 2.0);
  EXPECT_DOUBLE_EQ(edges.edges[3], 8.0);
  xs.pop_back();  // 0..9: h = 0.2 * 9 = 1.8
  EXPECT_DOUBLE_EQ(fit_bins(xs).edges[0], 1.8);
}

TEST(FitBins, SymmetricSampleSplitsEvenly) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0, 0.01);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = n(rng);
  const auto edges = fit_bins(xs);
  std::array<int, 5> counts{};
  for (double x : xs) ++counts[discretize(x, edges).value()];
  for (int c : counts) EXPECT_NEAR(c / 1000.0, 0.2, 0.05);

  std::normal_distribution<double> fresh(0, 0.01);
  counts = {};
  for (int i = 0; i < 1000; ++i) ++counts[discretize(fresh(rng), edges).value()];
  for (int c : counts) EXPECT_NEAR(c / 1000.0, 0.2, 0.05);
}

TEST(FitBins, DegenerateInputs) {
  EXPECT_THROW(fit_bins(std::vector<double>(50, 0.0)), CalibrationError);
  EXPECT_THROW(fit_bins(std::vector<double>{1, 2, 3, 4}), CalibrationError);
  std::vector<double> lumpy(100, 0.0);
  for (int i = 0; i < 5; ++i) lumpy[i] = i + 1;
  EXPECT_THROW(fit_bins(lumpy), CalibrationError);
}

TEST(Discretize, BoundariesGoToLowerClass) {
  EXPECT_EQ(discretize(-0.5, kEdges).value(), 0);
  EXPECT_EQ(discretize(0.5, kEdges).value(), 4);
  EXPECT_EQ(discretize(-0.02, kEdges).value(), 0);
  EXPECT_EQ(discretize(-0.01, kEdges).value(), 1);
  EXPECT_EQ(discretize(0.0, kEdges).value(), 2);
  EXPECT_EQ(discretize(0.02, kEdges).value(), 3);
}

TEST(Discretize, Monotone) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int i = 0; i < 10000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(discretize(a, kEdges), discretize(b, kEdges));
  }
}

TEST(BinsFile, RoundTripAndValidation) {
  EXPECT_EQ(parse_bins(format_bins(kEdges)).edges, kEdges.edges);
  EXPECT_ANY_THROW(parse_bins("0.1\n0.2\n0.2\n0.3\n"));
  EXPECT_ANY_THROW(parse_bins("0.1\n0.2\n0.3\n"));
}

TEST(ClassLabel, RangeAndEncoding) {
  EXPECT_THROW(ClassLabel(5), std::out_of_range);
  EXPECT_THROW(ClassLabel(-1), std::out_of_range);
  EXPECT_EQ(ClassLabel(3).unit(), 0.75);
  EXPECT_TRUE(ClassLabel(0).is_extreme());
  EXPECT_TRUE(ClassLabel(4).is_extreme());
  EXPECT_FALSE(ClassLabel(1).is_extreme());
  EXPECT_EQ(ClassLabel().value(), 2);
}

TEST(TruthStore, TrainingSeesOnlyPreviousDay) {
  TruthStore store(flat_timeline(2), kEdges);
  store.enter_training();
  EXPECT_EQ(store.label(74, 1).value(), 2);
  const auto before = TruthStore::global_violations();
  EXPECT_THROW(store.label(75, 0), CausalityError);
  ++testing::expected_violations();
  EXPECT_EQ(TruthStore::global_violations(), before + 1);
}

TEST(TruthStore, InferenceHonoursTheDelayExhaustively) {
  TruthStore store(flat_timeline(), kEdges);
  for (int rho = 75; rho < kTimelineRounds; ++rho) {
    store.enter_inference(rho);
    for (int r = 0; r <= rho - kLabelDelay && store.has_label(r); ++r) EXPECT_NO_THROW(store.label(r, 0));
    for (int r = rho - kLabelDelay + 1; r <= rho; ++r) {
      EXPECT_THROW(store.label(r, 0), CausalityError) << rho << ' ' << r;
      ++testing::expected_violations();
    }
  }
}

TEST(TruthStore, OfflineReadsAreUnaudited) {
  TruthStore store(flat_timeline(), kEdges);
  store.enter_inference(75);
  const auto before = TruthStore::global_violations();
  EXPECT_TRUE(store.label_offline(139, 0));
  EXPECT_FALSE(store.label_offline(140, 0));
  EXPECT_EQ(TruthStore::global_violations(), before);
}

TEST(TruthStore, CsvListsLabelledCells) {
  TruthStore store(flat_timeline(2), kEdges);
  const auto csv = store.format_csv({"T0", "T1"});
  EXPECT_EQ(csv.rfind("round,ticker,raw_return,class\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 140 * 2);
}

}  // namespace
}  // namespace wme
