#include <gtest/gtest.h>

#include "support.hpp"

namespace {

class CausalityAudit : public ::testing::Environment {
 public:
  void TearDown() override {
    EXPECT_EQ(wme::TruthStore::global_violations(), wme::testing::expected_violations())
        << "truth reads past the label horizon during inference";
  }
};

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::AddGlobalTestEnvironment(new CausalityAudit);
  return RUN_ALL_TESTS();
}
