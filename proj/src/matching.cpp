#include "sfod/matching.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "sfod/errors.hpp"

namespace sfod {

std::size_t MatchResult::tp_count() const {
  return static_cast<std::size_t>(std::count(true_positive.begin(), true_positive.end(), true));
}

MatchResult match_detections(std::span<const Detection> predictions,
                             std::span<const BoundingBox> ground_truth, double iou_threshold) {
  if (!(iou_threshold > 0.0) || !(iou_threshold < 1.0)) {
    throw ValidationError(fmt::format("iou threshold {} outside (0,1)", iou_threshold));
  }
  for (std::size_t i = 1; i < predictions.size(); ++i) {
    if (predictions[i].confidence() > predictions[i - 1].confidence()) {
      throw ContractViolation(
          fmt::format("predictions not sorted by descending confidence at index {}", i));
    }
  }

  MatchResult result;
  result.true_positive.assign(predictions.size(), false);
  result.matched_gt.assign(predictions.size(), -1);
  std::vector<bool> taken(ground_truth.size(), false);

  for (std::size_t p = 0; p < predictions.size(); ++p) {
    int best = -1;
    double best_iou = iou_threshold;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (taken[g]) {
        continue;
      }
      const double overlap = iou(predictions[p].box(), ground_truth[g]);
      if (overlap > best_iou || (best < 0 && overlap >= iou_threshold)) {
        best = static_cast<int>(g);
        best_iou = overlap;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      result.true_positive[p] = true;
      result.matched_gt[p] = best;
    }
  }
  result.unmatched_gt = static_cast<std::size_t>(std::count(taken.begin(), taken.end(), false));
  return result;
}

}  // namespace sfod
