#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sfod/errors.hpp"
#include "sfod/toy.hpp"
#include "support/oracles.hpp"

namespace sfod {
namespace {

TEST(ToyTest, DefaultDegrees) {
  const auto d = default_noise_degrees();
  ASSERT_EQ(d.size(), 11u);
  EXPECT_DOUBLE_EQ(d.front(), 0.0);
  EXPECT_DOUBLE_EQ(d[3], 0.15);
  EXPECT_DOUBLE_EQ(d.back(), 0.5);
}

TEST(ToyTest, CleanLabelsGiveLowestEntropy) {
  const auto degrees = default_noise_degrees();
  const auto pts = toy_noise_experiment(degrees, 2, 1);
  ASSERT_EQ(pts.size(), degrees.size());
  std::vector<double> h;
  for (const auto& p : pts) {
    EXPECT_NEAR(p.entropy, 0.5 * (p.entropy_minus + p.entropy_plus), 1e-15);
    h.push_back(p.entropy);
  }
  for (std::size_t i = 1; i < h.size(); ++i) {
    EXPECT_LT(h[0], h[i]) << "degree " << degrees[i];
  }
  EXPECT_GE(testing::spearman(degrees, h), 0.9);
}

TEST(ToyTest, DeterministicInSeed) {
  const std::vector<double> degrees{0.0, 0.2, 0.4};
  const auto a = toy_noise_experiment(degrees, 1, 7);
  EXPECT_EQ(toy_noise_experiment(degrees, 1, 7), a);
  EXPECT_NE(toy_noise_experiment(degrees, 1, 8), a);
}

TEST(ToyTest, RejectsBadInput) {
  const std::vector<double> bad{0.6};
  EXPECT_THROW(toy_noise_experiment(bad, 1, 0), ValidationError);
  const std::vector<double> ok{0.1};
  EXPECT_THROW(toy_noise_experiment(ok, 0, 0), ValidationError);
  ToyConfig c;
  c.samples_per_class = 0;
  EXPECT_THROW(toy_noise_experiment(ok, 1, 0, c), ValidationError);
}

TEST(SpearmanOracleTest, HandlesTies) {
  EXPECT_DOUBLE_EQ(testing::spearman({1, 2, 3}, {10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(testing::spearman({1, 2, 3}, {3, 2, 1}), -1.0);
  // Ranks (1, 2.5, 2.5, 4) vs (1,2,3,4).
  EXPECT_NEAR(testing::spearman({1, 2, 3, 4}, {5, 6, 6, 9}), 4.5 / std::sqrt(5.0 * 4.5), 1e-12);
}

}  // namespace
}  // namespace sfod
