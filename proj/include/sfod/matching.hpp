#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sfod/detection.hpp"

namespace sfod {

inline constexpr double kDefaultIouThreshold = 0.5;

struct MatchResult {
  /// One flag per prediction, in input order.
  std::vector<bool> true_positive;
  /// Index of the matched ground-truth box, or -1 for a false positive.
  std::vector<int> matched_gt;
  std::size_t unmatched_gt = 0;

  std::size_t tp_count() const;
  std::size_t fp_count() const { return true_positive.size() - tp_count(); }
};

/// Greedy VOC-style matching. Predictions must be sorted by descending
/// confidence (ContractViolation otherwise); each one claims the unmatched
/// ground-truth box with the highest IoU, if that IoU reaches the threshold.
MatchResult match_detections(std::span<const Detection> predictions,
                             std::span<const BoundingBox> ground_truth,
                             double iou_threshold = kDefaultIouThreshold);

}  // namespace sfod
