#include <gtest/gtest.h>

#include "json.hpp"
#include "support.hpp"
#include "wme/error.hpp"
#include "wme/experts.hpp"
#include "wme/protocol.hpp"

namespace wme {
namespace {

FeatureVector with(Feature f, double z) {
  FeatureVector v;
  v.set(f, z);
  return v;
}

TEST(ClassFromZ, Thresholds) {
  EXPECT_EQ(class_from_z(-2).value(), 0);
  EXPECT_EQ(class_from_z(-1.5).value(), 1);
  EXPECT_EQ(class_from_z(-0.6).value(), 1);
  EXPECT_EQ(class_from_z(-0.5).value(), 2);
  EXPECT_EQ(class_from_z(0.5).value(), 2);
  EXPECT_EQ(class_from_z(0.7).value(), 3);
  EXPECT_EQ(class_from_z(1.6).value(), 4);
}

TEST(Builtins, ConstantIsAlwaysNeutral) {
  auto e = make_builtin("constant2", 1);
  for (int r = 0; r < 150; r += 7) EXPECT_EQ(e->predict(r, "A", with(kMom30, 3.0)).value(), 2);
}

TEST(Builtins, SmaCrossoverReadsShortAboveLongAsUptrend) {
  auto e = make_builtin("sma-crossover", 1);
  EXPECT_EQ(e->predict(80, "A", with(kSma20MinusSma10, -2.0)).value(), 4);
  EXPECT_EQ(e->predict(80, "A", with(kSma20MinusSma10, 2.0)).value(), 0);
  EXPECT_EQ(e->predict(80, "A", with(kSma20MinusSma10, 0.0)).value(), 2);
}

TEST(Builtins, DirectionalRules) {
  EXPECT_EQ(make_builtin("rsi-reversal", 0)->predict(0, "A", with(kRsi14, 2.0)).value(), 0);
  EXPECT_EQ(make_builtin("momentum-quantile", 0)->predict(0, "A", with(kMom30, 2.0)).value(), 4);
  EXPECT_EQ(make_builtin("bollinger-band", 0)->predict(0, "A", with(kBbPercent, -1.0)).value(), 3);
  EXPECT_EQ(make_builtin("changelen-streak", 0)->predict(0, "A", with(kChangelenClose, 1.0)).value(), 3);
  FeatureVector v;
  v.set(kCloseSlope3, -3);
  v.set(kCloseSlope5, -1.5);
  v.set(kCloseSlope10, 0);
  EXPECT_EQ(make_builtin("slope-vote", 0)->predict(0, "A", v).value(), 1);
}

TEST(Builtins, InvalidSlotsReadAsNeutral) {
  const FeatureVector none;
  for (const auto& name : builtin_names())
    if (name != "seeded-random") EXPECT_EQ(make_builtin(name, 0)->predict(10, "A", none).value(), 2) << name;
}

TEST(Builtins, SeededRandomIsReproducible) {
  auto a = make_builtin("seeded-random", 99);
  auto b = make_builtin("seeded-random", 99);
  auto c = make_builtin("seeded-random", 100);
  auto d = make_builtin("seeded-random@2", 99);
  const FeatureVector z;
  std::array<int, 5> counts{};
  int diff_seed = 0, diff_tag = 0;
  for (int r = 0; r < 150; ++r)
    for (const char* t : {"A", "B", "C"}) {
      const int x = a->predict(r, t, z).value();
      EXPECT_EQ(x, b->predict(r, t, z).value());
      diff_seed += x != c->predict(r, t, z).value();
      diff_tag += x != d->predict(r, t, z).value();
      ++counts[x];
    }
  EXPECT_GT(diff_seed, 100);
  EXPECT_GT(diff_tag, 100);
  for (int n : counts) EXPECT_NEAR(n / 450.0, 0.2, 0.07);
}

TEST(Roster, EightBuiltinsAndErrors) {
  EXPECT_EQ(builtin_roster(builtin_names(), 0).size(), 8u);
  const std::vector<std::string> dup{"constant2", "constant2"};
  EXPECT_THROW(builtin_roster(dup, 0), ConfigError);
  EXPECT_THROW(make_builtin("oracle", 0), ConfigError);
  const std::vector<std::string> tagged{"seeded-random@1", "seeded-random@2"};
  EXPECT_EQ(builtin_roster(tagged, 0).size(), 2u);
}

TEST(Panel, QueryShapesAndAbstentionRecords) {
  const auto s = testing::make_scenario(3);
  ExpertPanel panel(builtin_roster(builtin_names(), 3));
  EXPECT_EQ(panel.size(), 8);
  const auto preds = panel.query(s.feed().query(100));
  EXPECT_EQ(preds.classes.rows(), 8);
  EXPECT_EQ(preds.classes.cols(), 8);
  ASSERT_EQ(preds.records.size(), 64u);
  EXPECT_EQ(preds.records[9].expert, 1);
  EXPECT_EQ(preds.records[9].ticker, 1);
  for (const auto& rec : preds.records) {
    EXPECT_FALSE(rec.abstained);
    EXPECT_EQ(rec.label.value(), preds.classes(rec.expert, rec.ticker));
  }
  EXPECT_THROW(panel.add(make_builtin("constant2", 0)), ConfigError);
}

TEST(Panel, EmptyRosterRejectedByEngine) {
  const auto s = testing::make_scenario(3);
  ExpertPanel panel;
  auto truths = s.truths;
  EXPECT_THROW(run_training_mode(s.feed(), panel, truths, {}), ConfigError);
}

TEST(Protocol, MessagesAndReplies) {
  const auto hello = nlohmann::json::parse(protocol::hello());
  EXPECT_EQ(hello["type"], "hello");
  EXPECT_EQ(hello["schema"].size(), 32u);
  EXPECT_EQ(hello["classes"], 5);

  FeatureVector z;
  z.set(kMom30, 1.25);
  const auto f = nlohmann::json::parse(protocol::features(80, "ABC", z));
  EXPECT_EQ(f["round"], 80);
  EXPECT_EQ(f["ticker"], "ABC");
  EXPECT_EQ(f["values"][kMom30], 1.25);
  EXPECT_EQ(f["valid"][kMom30], true);
  EXPECT_EQ(f["valid"][kSma10], false);

  auto r = protocol::parse_reply(R"({"type":"prediction","round":80,"ticker":"ABC","class":4})");
  ASSERT_TRUE(std::holds_alternative<protocol::PredictionReply>(r));
  EXPECT_EQ(std::get<protocol::PredictionReply>(r).klass, 4);
  EXPECT_TRUE(std::holds_alternative<protocol::Ready>(protocol::parse_reply(R"({"type":"ready","name":"x"})")));
  EXPECT_TRUE(std::holds_alternative<protocol::Malformed>(protocol::parse_reply("{oops")));
  EXPECT_TRUE(std::holds_alternative<protocol::Malformed>(protocol::parse_reply(R"({"type":"prediction","round":1})")));
  EXPECT_TRUE(std::holds_alternative<protocol::Unknown>(protocol::parse_reply(R"({"type":"log"})")));
}

}  // namespace
}  // namespace wme
