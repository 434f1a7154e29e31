#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "sfod/errors.hpp"
#include "sfod/mosaic.hpp"
#include "support/mosaic_check.hpp"
#include "support/oracles.hpp"

namespace sfod {
namespace {

TEST(TransformLabelTest, IdentityKeepsBox) {
  const BoundingBox b(10, 20, 30, 40);
  const auto r = transform_label(b, 1.0, 0.0, 0.0, BoundingBox(0, 0, 100, 100), 0.25);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->box, b);
  EXPECT_EQ(r->visible_fraction, 1.0);
}

TEST(TransformLabelTest, HalfScaleExample) {
  // (10,20)-(30,40) at scale 0.5 lands on (5,10)-(15,20), then moves by (100,50).
  const auto r = transform_label(BoundingBox(10, 20, 30, 40), 0.5, 100, 50,
                                 BoundingBox(100, 50, 300, 300), 0.25);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->box, BoundingBox(105, 60, 115, 70));
  EXPECT_DOUBLE_EQ(r->box.area(), 0.25 * 400);
}

TEST(TransformLabelTest, ClipsAndDrops) {
  const BoundingBox crop(0, 0, 50, 50);
  // Three quarters outside: kept at exactly the ratio.
  const auto edge = transform_label(BoundingBox(40, 40, 60, 60), 1.0, 0, 0, crop, 0.25);
  ASSERT_TRUE(edge);
  EXPECT_EQ(edge->box, BoundingBox(40, 40, 50, 50));
  EXPECT_DOUBLE_EQ(edge->visible_fraction, 0.25);
  EXPECT_FALSE(transform_label(BoundingBox(45, 40, 65, 60), 1.0, 0, 0, crop, 0.25));
  EXPECT_FALSE(transform_label(BoundingBox(60, 60, 70, 70), 1.0, 0, 0, crop, 0.25));
  EXPECT_THROW(transform_label(BoundingBox(0, 0, 1, 1), 0.0, 0, 0, crop, 0.25), ValidationError);
}

TEST(MosaicConfigTest, Validation) {
  MosaicConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lambda_min = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.lambda_min = 0.8;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.scale_min = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.min_visible_area_ratio = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(ComposeMosaicTest, FixedDrawPlacesTiles) {
  CounterRng rng(1);
  auto f = testing::random_mosaic_inputs(rng);
  MosaicConfig cfg;
  const MosaicDraw draw{0.5, 0.25, {1.0, 0.5, 0.5, 1.0}};
  const auto s = compose_mosaic(f.inputs, cfg, draw);
  EXPECT_DOUBLE_EQ(s.split_x, 320);
  EXPECT_DOUBLE_EQ(s.split_y, 120);
  EXPECT_EQ(s.tiles[1].quadrant, Quadrant::TopRight);
  EXPECT_EQ(s.tiles[1].crop_window, BoundingBox(320, 0, 640, 120));
  EXPECT_DOUBLE_EQ(s.tiles[3].offset_x, 320);
  EXPECT_DOUBLE_EQ(s.tiles[3].offset_y, 120);
  EXPECT_EQ(testing::check_mosaic(s, f.inputs, cfg), "");
}

TEST(ComposeMosaicTest, InvariantFuzz) {
  CounterRng rng(2);
  MosaicConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    auto f = testing::random_mosaic_inputs(rng);
    const auto s = compose_mosaic(f.inputs, cfg, rng);
    ASSERT_GE(s.split_x, cfg.lambda_min * cfg.canvas_width);
    ASSERT_LE(s.split_x, cfg.lambda_max * cfg.canvas_width);
    for (const auto& t : s.tiles) {
      ASSERT_GE(t.scale, cfg.scale_min);
      ASSERT_LE(t.scale, cfg.scale_max);
    }
    ASSERT_EQ(testing::check_mosaic(s, f.inputs, cfg), "") << "case " << i;
  }
}

TEST(ComposeMosaicTest, RasterOracle) {
  CounterRng rng(3);
  MosaicConfig cfg;
  for (int i = 0; i < 20; ++i) {
    auto f = testing::random_mosaic_inputs(rng);
    const auto s = compose_mosaic(f.inputs, cfg, rng);
    ASSERT_EQ(testing::check_mosaic_raster(s, f.inputs, cfg, 1.0), "") << "case " << i;
  }
}

class MosaicBatchTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (int i = 0; i < 10; ++i) {
      ids_.push_back("p" + std::to_string(i));
      labels_.push_back({{BoundingBox(10, 10, 60, 50), i % 3}});
    }
    for (int i = 0; i < 10; ++i) {
      pool_.push_back({ids_[i], 200, 150, labels_[i]});
    }
  }

  std::vector<std::string> ids_;
  std::vector<std::vector<LabeledBox>> labels_;
  std::vector<MosaicInput> pool_;
};

TEST_F(MosaicBatchTest, CountZeroAndDeterminism) {
  MosaicConfig cfg;
  EXPECT_TRUE(mosaic_batch(pool_, 0, cfg, 1).empty());
  const auto a = mosaic_batch(pool_, 5, cfg, 9);
  const auto b = mosaic_batch(pool_, 5, cfg, 9);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].split_x, b[k].split_x);
    for (std::size_t t = 0; t < 4; ++t) {
      EXPECT_EQ(a[k].tiles[t].source_slot, b[k].tiles[t].source_slot);
      EXPECT_EQ(a[k].tiles[t].source_image_id, ids_[a[k].tiles[t].source_slot]);
    }
  }
  // A prefix of a longer batch is the shorter batch.
  const auto longer = mosaic_batch(pool_, 8, cfg, 9);
  EXPECT_EQ(longer[4].split_y, a[4].split_y);
}

TEST_F(MosaicBatchTest, PoolOfFourUsesEveryImage) {
  const std::span<const MosaicInput> four(pool_.data(), 4);
  for (const auto& s : mosaic_batch(four, 20, MosaicConfig{}, 3)) {
    std::array<bool, 4> used{};
    for (const auto& t : s.tiles) {
      used[t.source_slot] = true;
    }
    EXPECT_EQ(used, (std::array<bool, 4>{true, true, true, true}));
  }
}

TEST_F(MosaicBatchTest, PoolUsageIsUniform) {
  const std::size_t samples = 5000;
  std::vector<double> uses(pool_.size(), 0.0);
  for (const auto& s : mosaic_batch(pool_, samples, MosaicConfig{}, 4)) {
    for (const auto& t : s.tiles) {
      uses[t.source_slot] += 1;
    }
  }
  // Each image is in a given sample with probability 4/10.
  const double p = 0.4;
  const double mean = p * samples;
  const double sd = std::sqrt(samples * p * (1 - p));
  for (double u : uses) {
    EXPECT_NEAR(u, mean, 3 * sd);
  }
}

TEST_F(MosaicBatchTest, SmallPoolThrows) {
  const std::span<const MosaicInput> three(pool_.data(), 3);
  EXPECT_THROW(mosaic_batch(three, 1, MosaicConfig{}, 0), ValidationError);
}

}  // namespace
}  // namespace sfod
