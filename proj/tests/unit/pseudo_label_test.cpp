#include <gtest/gtest.h>

#include <algorithm>

#include "sfod/errors.hpp"
#include "sfod/pseudo_label.hpp"
#include "support/oracles.hpp"
#include "support/random_data.hpp"

namespace sfod {
namespace {

using testing::peaked;

Dataset three_detections() {
  Dataset ds;
  ds.category_names = {"a", "b"};
  ImageRecord im{"x", 100, 100, {}, std::nullopt};
  im.detections.emplace_back(BoundingBox(0, 0, 10, 10), peaked(2, 0, 0.9));
  im.detections.emplace_back(BoundingBox(5, 5, 15, 15), peaked(2, 1, 0.5));
  im.detections.emplace_back(BoundingBox(9, 9, 19, 19), peaked(2, 1, 0.4));
  ds.images.push_back(im);
  ds.images.push_back({"y", 50, 50, {}, std::nullopt});
  return ds;
}

TEST(PseudoLabelTest, StrictlyAboveThreshold) {
  const auto ds = three_detections();
  const auto at = generate_pseudo_labels(ds, 0.5);
  ASSERT_EQ(at.positive_count(), 1u);
  EXPECT_EQ(at.images[0].positives[0].category, 0);
  EXPECT_EQ(at.images[0].positives[0].box, BoundingBox(0, 0, 10, 10));
  EXPECT_EQ(generate_pseudo_labels(ds, 0.49).positive_count(), 2u);
  EXPECT_EQ(generate_pseudo_labels(ds, 0.0).positive_count(), 3u);
  EXPECT_EQ(generate_pseudo_labels(ds, 1.0).positive_count(), 0u);
  EXPECT_EQ(at.images.size(), 2u);
  EXPECT_EQ(at.images[1].image_id, "y");
}

TEST(PseudoLabelTest, RejectsThresholdOutsideUnitInterval) {
  const auto ds = three_detections();
  EXPECT_THROW(generate_pseudo_labels(ds, -0.1), ValidationError);
  EXPECT_THROW(generate_pseudo_labels(ds, 1.5), ValidationError);
}

TEST(PseudoLabelTest, RefilterMatchesRegenerationAndIsIdempotent) {
  const auto ds = testing::random_dataset(3, 20, 3, false);
  const auto low = generate_pseudo_labels(ds, 0.2);
  for (double h : {0.2, 0.35, 0.5, 0.8}) {
    const auto r = refilter(low, h);
    EXPECT_EQ(r, generate_pseudo_labels(ds, h));
    EXPECT_EQ(refilter(r, h), r);
  }
  EXPECT_THROW(refilter(low, 0.1), ValidationError);
}

TEST(PseudoLabelTest, MonotoneInThreshold) {
  CounterRng rng(9);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ds = testing::random_dataset(seed, 5, 2, false);
    double h1 = rng.uniform();
    double h2 = rng.uniform();
    if (h1 > h2) {
      std::swap(h1, h2);
    }
    const auto a = generate_pseudo_labels(ds, h1);
    const auto b = generate_pseudo_labels(ds, h2);
    for (std::size_t i = 0; i < b.images.size(); ++i) {
      for (const auto& p : b.images[i].positives) {
        ASSERT_NE(std::find(a.images[i].positives.begin(), a.images[i].positives.end(), p),
                  a.images[i].positives.end());
      }
    }
  }
}

TEST(PseudoLabelTest, Stats) {
  const auto labels = generate_pseudo_labels(three_detections(), 0.1);
  const auto s = pseudo_label_stats(labels);
  EXPECT_EQ(s.total, 3u);
  EXPECT_EQ(s.per_category, (std::vector<std::size_t>{1, 2}));
  EXPECT_DOUBLE_EQ(s.positives_per_image, 1.5);
}

}  // namespace
}  // namespace sfod
