#include "support/random_data.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sfod::testing {

ProbVector random_probs(CounterRng& rng, std::size_t fg) {
  std::vector<double> logits(fg + 1);
  for (auto& l : logits) {
    l = rng.uniform(-3.0, 3.0);
  }
  const double hi = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (auto& l : logits) {
    l = std::exp(l - hi);
    sum += l;
  }
  for (auto& l : logits) {
    l /= sum;
  }
  return ProbVector(std::move(logits));
}

BoundingBox random_box_in(CounterRng& rng, double width, double height) {
  const double w = rng.uniform(4.0, width / 3);
  const double h = rng.uniform(4.0, height / 3);
  const double x = rng.uniform(0.0, width - w);
  const double y = rng.uniform(0.0, height - h);
  return {x, y, x + w, y + h};
}

Dataset random_dataset(std::uint64_t seed, std::size_t images, std::size_t categories,
                       bool with_ground_truth) {
  CounterRng rng(seed);
  Dataset ds;
  for (std::size_t c = 0; c < categories; ++c) {
    ds.category_names.push_back("c" + std::to_string(c));
  }
  for (std::size_t i = 0; i < images; ++i) {
    ImageRecord im;
    im.id = "im" + std::to_string(i);
    im.width = 200;
    im.height = 150;
    std::vector<LabeledBox> gts;
    const auto n_gt = rng.below(5);
    for (std::uint64_t g = 0; g < n_gt; ++g) {
      gts.push_back({random_box_in(rng, im.width, im.height),
                     static_cast<int>(rng.below(categories))});
    }
    const auto n_det = rng.below(7);
    for (std::uint64_t d = 0; d < n_det; ++d) {
      auto probs = random_probs(rng, categories);
      if (!gts.empty() && rng.uniform() < 0.6) {
        const auto& gt = gts[rng.below(gts.size())];
        const double j = rng.uniform(-2.0, 2.0);
        const BoundingBox b(std::max(0.0, gt.box.x_min() + j), gt.box.y_min(),
                            std::min(im.width, gt.box.x_max() + j), gt.box.y_max());
        im.detections.emplace_back(b, std::move(probs));
      } else {
        im.detections.emplace_back(random_box_in(rng, im.width, im.height), std::move(probs));
      }
    }
    if (with_ground_truth) {
      im.ground_truth = std::move(gts);
    }
    ds.images.push_back(std::move(im));
  }
  return ds;
}

}  // namespace sfod::testing
