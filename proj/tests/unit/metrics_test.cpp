#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <vector>

#include "sfod/errors.hpp"
#include "sfod/metrics.hpp"
#include "support/oracles.hpp"
#include "support/random_data.hpp"

namespace sfod {
namespace {

using testing::peaked;

TEST(EntropyTest, OneHotIsZero) {
  EXPECT_EQ(detection_self_entropy(ProbVector({1.0, 0.0, 0.0})), 0.0);
  EXPECT_EQ(detection_self_entropy(ProbVector({0.0, 1.0})), 0.0);
}

TEST(EntropyTest, UniformTwoEntries) {
  EXPECT_NEAR(detection_self_entropy(ProbVector({0.5, 0.5})), 0.34657359027997264, 1e-12);
}

TEST(EntropyTest, UniformIsLogNOverN) {
  for (std::size_t n = 2; n <= 9; ++n) {
    const ProbVector p(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    EXPECT_NEAR(detection_self_entropy(p), std::log(static_cast<double>(n)) / n, 1e-12);
  }
}

TEST(EntropyTest, MatchesSummationOracle) {
  const std::vector<double> v{0.7, 0.2, 0.1};
  EXPECT_NEAR(detection_self_entropy(ProbVector(v)),
              static_cast<double>(testing::summed_entropy(v)), 1e-15);
  CounterRng rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto p = testing::random_probs(rng, 1 + rng.below(6));
    const std::vector<double> raw(p.values().begin(), p.values().end());
    ASSERT_NEAR(detection_self_entropy(p), static_cast<double>(testing::summed_entropy(raw)),
                1e-14);
  }
}

TEST(EntropyTest, MaximalAtUniform) {
  for (std::size_t n = 2; n <= 6; ++n) {
    const double u = 1.0 / static_cast<double>(n);
    const double top = detection_self_entropy(ProbVector(std::vector<double>(n, u)));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) {
          continue;
        }
        std::vector<double> v(n, u);
        v[i] += 1e-6;
        v[j] -= 1e-6;
        ASSERT_LT(detection_self_entropy(ProbVector(v)), top);
      }
    }
  }
}

TEST(EntropyTest, InvariantToReordering) {
  const std::vector<double> v{0.05, 0.6, 0.15, 0.2};
  auto w = v;
  std::sort(w.begin(), w.end());
  do {
    ASSERT_NEAR(detection_self_entropy(ProbVector(w)), detection_self_entropy(ProbVector(v)),
                1e-15);
  } while (std::next_permutation(w.begin(), w.end()));
}

TEST(EntropyTest, MeanOverImagesSkipsEmpty) {
  Dataset ds;
  ds.category_names = {"a"};
  ImageRecord a{"a", 10, 10, {}, std::nullopt};
  a.detections.emplace_back(BoundingBox(0, 0, 1, 1), ProbVector({1.0, 0.0}));
  a.detections.emplace_back(BoundingBox(0, 0, 1, 1), ProbVector({0.5, 0.5}));
  ImageRecord b{"b", 10, 10, {}, std::nullopt};
  b.detections.emplace_back(BoundingBox(0, 0, 1, 1), ProbVector({0.5, 0.5}));
  ImageRecord c{"c", 10, 10, {}, std::nullopt};
  ds.images = {a, b, c};
  const auto r = mean_self_entropy(ds);
  const double h = 0.5 * std::log(2.0);
  EXPECT_NEAR(r.mean_self_entropy, (h / 2 + h) / 2, 1e-15);
  EXPECT_EQ(r.skipped_empty_images, 1u);
  ASSERT_EQ(r.per_image.size(), 2u);
  EXPECT_EQ(r.per_image[1].image_id, "b");

  ds.images = {c};
  EXPECT_THROW(mean_self_entropy(ds), ValidationError);
}

TEST(AveragePrecisionTest, Examples) {
  EXPECT_DOUBLE_EQ(average_precision({true, true, true}, 3), 1.0);
  EXPECT_DOUBLE_EQ(average_precision({}, 3), 0.0);
  EXPECT_DOUBLE_EQ(average_precision({false, false}, 3), 0.0);
  EXPECT_DOUBLE_EQ(average_precision({true, true}, 4), 0.5);
  EXPECT_NEAR(average_precision({true, false, true}, 2), 0.5 + 0.5 * 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(average_precision({false, true}, 1), 0.5, 1e-15);
  EXPECT_THROW(average_precision({true}, 0), ValidationError);
  EXPECT_THROW(average_precision({true, true}, 1), ValidationError);
}

TEST(AveragePrecisionTest, BruteForceOracle) {
  CounterRng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const auto n = rng.below(11);
    std::vector<bool> flags;
    std::size_t tp = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
      flags.push_back(rng.uniform() < 0.5);
      tp += flags.back() ? 1 : 0;
    }
    const std::size_t gt = std::max<std::size_t>(1, tp + rng.below(4));
    ASSERT_NEAR(average_precision(flags, gt), static_cast<double>(testing::brute_force_ap(flags, gt)),
                1e-12);
  }
}

TEST(AveragePrecisionTest, BetterRankingNeverHurts) {
  CounterRng rng(22);
  for (int i = 0; i < 500; ++i) {
    std::vector<bool> flags;
    std::size_t tp = 0;
    for (int k = 0; k < 8; ++k) {
      flags.push_back(rng.uniform() < 0.5);
      tp += flags.back() ? 1 : 0;
    }
    const std::size_t gt = tp + 1;
    const double before = average_precision(flags, gt);
    for (std::size_t k = 0; k + 1 < flags.size(); ++k) {
      if (!flags[k] && flags[k + 1]) {
        auto better = flags;
        better[k] = true;
        better[k + 1] = false;
        ASSERT_GE(average_precision(better, gt), before - 1e-15);
      }
    }
    auto longer = flags;
    longer.push_back(false);
    ASSERT_DOUBLE_EQ(average_precision(longer, gt), before);
  }
}

Dataset one_category(std::vector<LabeledBox> gts, std::vector<Detection> dets) {
  Dataset ds;
  ds.category_names = {"car"};
  ds.images.push_back({"x", 100, 100, std::move(dets), std::move(gts)});
  return ds;
}

TEST(MapTest, PerfectAndEmpty) {
  const std::vector<LabeledBox> gts{{{0, 0, 10, 10}, 0}, {{50, 50, 60, 70}, 0}};
  std::vector<Detection> dets;
  for (const auto& g : gts) {
    dets.emplace_back(g.box, peaked(1, 0, 0.9));
  }
  EXPECT_DOUBLE_EQ(evaluate_map(one_category(gts, dets)).map, 1.0);
  EXPECT_DOUBLE_EQ(evaluate_map(one_category(gts, {})).map, 0.0);

  Dataset no_gt = one_category({}, {});
  no_gt.images[0].ground_truth.reset();
  EXPECT_THROW(evaluate_map(no_gt), ValidationError);
}

TEST(MapTest, CategoriesWithoutGroundTruthAreSkipped) {
  Dataset ds;
  ds.category_names = {"a", "b"};
  std::vector<Detection> dets;
  dets.emplace_back(BoundingBox(0, 0, 10, 10), peaked(2, 0, 0.9));
  dets.emplace_back(BoundingBox(30, 30, 40, 40), peaked(2, 1, 0.9));
  ds.images.push_back({"x", 100, 100, dets, std::vector<LabeledBox>{{{0, 0, 10, 10}, 0}}});
  const auto r = evaluate_map(ds);
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_FALSE(r.per_category_ap[1].has_value());
  EXPECT_EQ(r.gt_counts, (std::vector<std::size_t>{1, 0}));
}

// Pools matches per category across images with the from-scratch greedy
// matcher and integrates with the brute-force AP.
double oracle_map(const Dataset& ds) {
  long double sum = 0;
  int counted = 0;
  for (std::size_t c = 0; c < ds.category_count(); ++c) {
    std::vector<std::pair<double, bool>> pooled;
    std::size_t gt_count = 0;
    for (const auto& im : ds.images) {
      std::vector<std::pair<double, BoundingBox>> preds;
      for (const auto& d : im.detections) {
        if (static_cast<std::size_t>(d.category()) == c) {
          preds.emplace_back(d.confidence(), d.box());
        }
      }
      std::stable_sort(preds.begin(), preds.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      std::vector<BoundingBox> boxes;
      for (const auto& g : *im.ground_truth) {
        if (static_cast<std::size_t>(g.category) == c) {
          boxes.push_back(g.box);
        }
      }
      gt_count += boxes.size();
      std::vector<BoundingBox> pboxes;
      for (const auto& p : preds) {
        pboxes.push_back(p.second);
      }
      const auto flags = testing::reference_greedy(pboxes, boxes, 0.5);
      for (std::size_t i = 0; i < preds.size(); ++i) {
        pooled.emplace_back(preds[i].first, flags[i]);
      }
    }
    if (gt_count == 0) {
      continue;
    }
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<bool> flags;
    for (const auto& p : pooled) {
      flags.push_back(p.second);
    }
    sum += testing::brute_force_ap(flags, gt_count);
    ++counted;
  }
  return static_cast<double>(sum / counted);
}

TEST(MapTest, FiveImageOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto ds = testing::random_dataset(seed, 5, 2);
    std::size_t gts = 0;
    for (const auto& im : ds.images) {
      gts += im.ground_truth->size();
    }
    if (gts == 0) {
      continue;
    }
    ASSERT_NEAR(evaluate_map(ds).map, oracle_map(ds), 1e-12) << "seed " << seed;
  }
}

TEST(HistogramTest, Example) {
  const std::vector<LabeledBox> gts{{{0, 0, 10, 10}, 0}, {{50, 50, 60, 60}, 0}};
  std::vector<Detection> dets;
  dets.emplace_back(BoundingBox(0, 0, 10, 10), peaked(1, 0, 0.95));
  dets.emplace_back(BoundingBox(20, 20, 30, 30), peaked(1, 0, 0.35));
  const auto edges = uniform_bin_edges(10);
  const auto h = confidence_histogram(one_category(gts, dets), edges);
  EXPECT_EQ(h.gt_total, 2u);
  EXPECT_DOUBLE_EQ(h.tp_ratio[9], 0.5);
  EXPECT_DOUBLE_EQ(h.fp_ratio[3], 0.5);
  EXPECT_DOUBLE_EQ(h.fn_ratio, 0.5);
  EXPECT_DOUBLE_EQ(std::accumulate(h.tp_ratio.begin(), h.tp_ratio.end(), 0.0), 0.5);
}

TEST(HistogramTest, TopEdgeFallsInLastBin) {
  const std::vector<LabeledBox> gts{{{0, 0, 10, 10}, 0}};
  std::vector<Detection> dets;
  dets.emplace_back(BoundingBox(0, 0, 10, 10), ProbVector({1.0, 0.0}));
  const auto edges = uniform_bin_edges(4);
  const auto h = confidence_histogram(one_category(gts, dets), edges);
  EXPECT_DOUBLE_EQ(h.tp_ratio[3], 1.0);
  EXPECT_DOUBLE_EQ(h.fn_ratio, 0.0);
}

TEST(HistogramTest, RejectsBadEdges) {
  const auto ds = one_category({{{0, 0, 10, 10}, 0}}, {});
  const std::vector<double> short_edges{0.0, 0.9};
  const std::vector<double> unsorted{0.0, 0.6, 0.4, 1.0};
  EXPECT_THROW(confidence_histogram(ds, short_edges), ValidationError);
  EXPECT_THROW(confidence_histogram(ds, unsorted), ValidationError);
  EXPECT_THROW(uniform_bin_edges(0), ValidationError);
}

TEST(HistogramTest, ConservationFuzz) {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const auto ds = testing::random_dataset(seed, 6, 3);
    std::size_t gts = 0;
    for (const auto& im : ds.images) {
      gts += im.ground_truth->size();
    }
    if (gts == 0) {
      continue;
    }
    const auto h = confidence_histogram(ds, uniform_bin_edges(7));
    const double tp = std::accumulate(h.tp_ratio.begin(), h.tp_ratio.end(), 0.0);
    ASSERT_NEAR(tp + h.fn_ratio, 1.0, 1e-12);
    for (double v : h.fp_ratio) {
      ASSERT_GE(v, 0.0);
    }
  }
}

}  // namespace
}  // namespace sfod
