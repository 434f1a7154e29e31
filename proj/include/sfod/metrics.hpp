#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sfod/detection.hpp"
#include "sfod/matching.hpp"

namespace sfod {

// ---------------------------------------------------------------------------
// Self-entropy
// ---------------------------------------------------------------------------

/// -(1/n) * sum_c p_c ln p_c over every entry of the vector (background
/// included), with 0 ln 0 = 0. Natural log, so the value is in nats.
double detection_self_entropy(const ProbVector& p);

struct ImageEntropy {
  std::string image_id;
  double entropy = 0.0;
};

struct EntropyReport {
  double mean_self_entropy = 0.0;
  std::vector<ImageEntropy> per_image;
  std::size_t skipped_empty_images = 0;
};

/// Mean over detections within each image, then mean over images that have
/// at least one detection. Throws ValidationError if every image is empty.
EntropyReport mean_self_entropy(const Dataset& dataset);

// ---------------------------------------------------------------------------
// Average precision
// ---------------------------------------------------------------------------

struct PrecisionRecallPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PrecisionRecallCurve {
  /// One point per prediction, in descending-confidence order.
  std::vector<PrecisionRecallPoint> points;
};

PrecisionRecallCurve precision_recall_curve(const std::vector<bool>& flags, std::size_t gt_count);

/// Area under the precision envelope (precision at recall r is the max
/// precision at any recall >= r). `flags` are TP/FP marks in descending
/// confidence order.
double average_precision(const std::vector<bool>& flags, std::size_t gt_count);

struct MapReport {
  /// nullopt for categories without any ground truth.
  std::vector<std::optional<double>> per_category_ap;
  std::vector<std::size_t> gt_counts;
  double map = 0.0;
};

/// Pools per-image greedy matches per category; mAP averages categories that
/// have ground truth. Throws ValidationError when no image carries ground truth.
MapReport evaluate_map(const Dataset& dataset, double iou_threshold = kDefaultIouThreshold);

// ---------------------------------------------------------------------------
// Confidence-interval accounting
// ---------------------------------------------------------------------------

struct ConfidenceHistogram {
  std::vector<double> bin_edges;
  /// Per bin: detections in [edge_i, edge_{i+1}) (last bin closed) that are
  /// TP / FP, divided by the total ground-truth count.
  std::vector<double> tp_ratio;
  std::vector<double> fp_ratio;
  /// Ground truth never matched even with every detection admitted.
  double fn_ratio = 0.0;
  std::size_t gt_total = 0;
};

/// Edges must be strictly increasing, start at 0 and end at 1.
ConfidenceHistogram confidence_histogram(const Dataset& dataset, std::span<const double> bin_edges,
                                         double iou_threshold = kDefaultIouThreshold);

std::vector<double> uniform_bin_edges(std::size_t bins);

/// Per-image, per-category matching of all detections. Returns
/// (confidence, is_tp) pairs for every detection, grouped by category.
std::vector<std::vector<std::pair<double, bool>>> scored_matches(const Dataset& dataset,
                                                                 double iou_threshold,
                                                                 std::vector<std::size_t>* gt_counts);

}  // namespace sfod
