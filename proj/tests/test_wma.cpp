#include <gtest/gtest.h>

#include "support.hpp"
#include "wme/utility.hpp"
#include "wme/wma.hpp"

namespace wme {
namespace {

Eigen::VectorXd v(std::initializer_list<double> xs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

Eigen::VectorXi c(std::initializer_list<int> xs) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (int x : xs) out(i++) = x;
  return out;
}

TEST(NormalizeScores, Examples) {
  EXPECT_TRUE(normalize_scores(v({1, 1, 2})).isApprox(v({0, 0, 1})));
  EXPECT_TRUE(normalize_scores(v({0.4, 0.4, 0.4, 0.4})).isApprox(v({0.25, 0.25, 0.25, 0.25})));
  EXPECT_NEAR((normalize_scores(v({0.2, 0.3, 0.5})) - v({0, 0.25, 0.75})).cwiseAbs().maxCoeff(), 0, 1e-15);
  EXPECT_TRUE(normalize_scores(v({-2, 0, 2})).isApprox(v({0, 1.0 / 3, 2.0 / 3})));
}

TEST(EmaUpdate, Examples) {
  EXPECT_DOUBLE_EQ(ema_alpha(5), 1.0 / 3.0);
  const auto w = v({0.2, 0.3, 0.5});
  EXPECT_TRUE(ema_update(w, w, 7).isApprox(w, 1e-15));
  EXPECT_TRUE(ema_update(v({0.5, 0.5}), v({1, 0}), 1).isApprox(v({1, 0})));
  const auto next = ema_update(v({0.25, 0.75}), v({1, 0}), 5);
  EXPECT_NEAR(next(0), 0.25 * 2 / 3 + 1.0 / 3, 1e-15);
  EXPECT_NEAR(next.sum(), 1.0, 1e-15);
}

TEST(Vote, Examples) {
  auto tie = vote(c({4, 0, 0}), v({0.5, 0.3, 0.2}));
  EXPECT_EQ(tie.label.value(), 0);
  EXPECT_TRUE(tie.tie);
  EXPECT_DOUBLE_EQ(tie.mass(0), 0.5);
  EXPECT_DOUBLE_EQ(tie.mass(4), 0.5);

  const auto single = vote(c({3}), v({1}));
  EXPECT_EQ(single.label.value(), 3);
  EXPECT_FALSE(single.tie);

  EXPECT_EQ(vote(c({3, 1}), v({0.6, 0.4})).label.value(), 3);
}

TEST(Vote, TiesPreferTheNeutralSide) {
  EXPECT_EQ(vote(c({1, 2}), v({0.5, 0.5})).label.value(), 2);
  EXPECT_EQ(vote(c({3, 1}), v({0.5, 0.5})).label.value(), 1);
  EXPECT_EQ(vote(c({4, 3}), v({0.5, 0.5})).label.value(), 3);
  // 0.1 + 0.2 vs 0.3 differs by one ulp: a tie under the relative tolerance.
  const auto near = vote(c({0, 0, 4}), v({0.1, 0.2, 0.3}));
  EXPECT_TRUE(near.tie);
  EXPECT_EQ(near.label.value(), 0);
}

TEST(Vote, MassSumsToWeightTotal) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> cls(0, 4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXi classes(8);
    Eigen::VectorXd w(8);
    for (int j = 0; j < 8; ++j) classes(j) = cls(rng), w(j) = u(rng);
    const auto out = vote(classes, w);
    EXPECT_NEAR(out.mass.sum(), w.sum(), 1e-12);
    EXPECT_GE(out.mass(out.label.value()), out.mass.maxCoeff() - 1e-12 * w.sum());
  }
}

TEST(Utility, MatrixCells) {
  const auto u = default_utility_matrix();
  EXPECT_EQ(utility_of(u, ClassLabel(4), ClassLabel(4)), 2);
  EXPECT_EQ(utility_of(u, ClassLabel(0), ClassLabel(4)), -2);
  EXPECT_EQ(utility_of(u, ClassLabel(3), ClassLabel(0)), -1);
  EXPECT_EQ(utility_of(u, ClassLabel(2), ClassLabel(0)), 0);
  for (int a = 0; a < 5; ++a)
    for (int p = 1; p < 4; ++p) EXPECT_EQ(utility_of(u, ClassLabel(a), ClassLabel(p)), 0);
}

TEST(Utility, FileRoundTripAndShippedMatrix) {
  const auto u = default_utility_matrix();
  EXPECT_EQ(parse_utility_matrix(format_utility_matrix(u)), u);
  EXPECT_EQ(load_utility_matrix(std::string(WME_SOURCE_DIR) + "/data/utility_matrix.txt"), u);
  EXPECT_ANY_THROW(parse_utility_matrix("1 2 3\n"));
}

TEST(ScoreExperts, AccuracyAndUtility) {
  ScoreWindow win(1, 5);
  Eigen::MatrixXi preds(2, 2);
  preds << 0, 0, 4, 2;
  Eigen::VectorXi truth(2);
  truth << 0, 0;
  win.push({10, preds, truth});
  const auto acc = *score_experts(win, Metric::kAccuracy, default_utility_matrix());
  EXPECT_DOUBLE_EQ(acc(0), 1.0);
  EXPECT_DOUBLE_EQ(acc(1), 0.0);
  const auto util = *score_experts(win, Metric::kUtility, default_utility_matrix());
  EXPECT_DOUBLE_EQ(util(0), 2.0);
  EXPECT_DOUBLE_EQ(util(1), -1.0);  // mean(-2, 0)

  Eigen::MatrixXi neutral = Eigen::MatrixXi::Constant(2, 2, 2);
  ScoreWindow flat(1, 5);
  flat.push({10, neutral, truth});
  EXPECT_EQ(score_experts(flat, Metric::kUtility, default_utility_matrix())->cwiseAbs().maxCoeff(), 0.0);
}

TEST(ScoreWindow, CapacityAndScorability) {
  ScoreWindow win(3, 4);
  const Eigen::MatrixXi p = Eigen::MatrixXi::Constant(1, 1, 2);
  const Eigen::VectorXi t = Eigen::VectorXi::Constant(1, 2);
  for (int r = 0; r < 6; ++r) {
    win.push({r, p, t});
    EXPECT_EQ(win.scorable(), r >= 2);
  }
  EXPECT_EQ(win.round_ids(), (std::vector<int>{2, 3, 4, 5}));
  EXPECT_FALSE(score_experts(ScoreWindow(3, 4), Metric::kAccuracy, default_utility_matrix()));
}

}  // namespace
}  // namespace wme
