#include "sfod/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

#include "sfod/errors.hpp"

namespace sfod {

double detection_self_entropy(const ProbVector& p) {
  double acc = 0.0;
  for (double v : p.values()) {
    if (v > 0.0) {
      acc += v * std::log(v);
    }
  }
  // -0.0 for one-hot vectors
  return acc == 0.0 ? 0.0 : -acc / static_cast<double>(p.size());
}

EntropyReport mean_self_entropy(const Dataset& dataset) {
  EntropyReport report;
  double total = 0.0;
  for (const auto& image : dataset.images) {
    if (image.detections.empty()) {
      ++report.skipped_empty_images;
      continue;
    }
    double sum = 0.0;
    for (const auto& det : image.detections) {
      sum += detection_self_entropy(det.probs());
    }
    const double mean = sum / static_cast<double>(image.detections.size());
    report.per_image.push_back({image.id, mean});
    total += mean;
  }
  if (report.per_image.empty()) {
    throw ValidationError("mean self-entropy undefined: no image has a detection");
  }
  report.mean_self_entropy = total / static_cast<double>(report.per_image.size());
  return report;
}

PrecisionRecallCurve precision_recall_curve(const std::vector<bool>& flags, std::size_t gt_count) {
  if (gt_count == 0) {
    throw ValidationError("precision/recall needs a positive ground-truth count");
  }
  PrecisionRecallCurve curve;
  curve.points.reserve(flags.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    tp += flags[i] ? 1 : 0;
    if (tp > gt_count) {
      throw ValidationError("more true positives than ground-truth objects");
    }
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(gt_count),
                            static_cast<double>(tp) / static_cast<double>(i + 1)});
  }
  return curve;
}

double average_precision(const std::vector<bool>& flags, std::size_t gt_count) {
  const auto curve = precision_recall_curve(flags, gt_count);
  const auto& pts = curve.points;
  if (pts.empty()) {
    return 0.0;
  }
  // Envelope from the right, then sum rectangles wherever recall steps up.
  std::vector<double> envelope(pts.size());
  double running = 0.0;
  for (std::size_t i = pts.size(); i-- > 0;) {
    running = std::max(running, pts[i].precision);
    envelope[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].recall > prev_recall) {
      ap += (pts[i].recall - prev_recall) * envelope[i];
      prev_recall = pts[i].recall;
    }
  }
  return std::clamp(ap, 0.0, 1.0);
}

std::vector<std::vector<std::pair<double, bool>>> scored_matches(const Dataset& dataset,
                                                                 double iou_threshold,
                                                                 std::vector<std::size_t>* gt_counts) {
  const auto n_categories = dataset.category_count();
  std::vector<std::vector<std::pair<double, bool>>> scored(n_categories);
  if (gt_counts != nullptr) {
    gt_counts->assign(n_categories, 0);
  }
  for (const auto& image : dataset.images) {
    const std::vector<LabeledBox> no_gt;
    const auto& gts = image.ground_truth ? *image.ground_truth : no_gt;
    for (std::size_t c = 0; c < n_categories; ++c) {
      std::vector<Detection> preds;
      for (const auto& det : image.detections) {
        if (static_cast<std::size_t>(det.category()) == c) {
          preds.push_back(det);
        }
      }
      std::vector<BoundingBox> boxes;
      for (const auto& gt : gts) {
        if (static_cast<std::size_t>(gt.category) == c) {
          boxes.push_back(gt.box);
        }
      }
      if (gt_counts != nullptr) {
        (*gt_counts)[c] += boxes.size();
      }
      const auto sorted = sorted_by_confidence(preds);
      const auto match = match_detections(sorted, boxes, iou_threshold);
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        scored[c].emplace_back(sorted[i].confidence(), match.true_positive[i]);
      }
    }
  }
  return scored;
}

MapReport evaluate_map(const Dataset& dataset, double iou_threshold) {
  if (!dataset.has_ground_truth()) {
    throw ValidationError("mAP needs ground truth on at least one image");
  }
  MapReport report;
  auto scored = scored_matches(dataset, iou_threshold, &report.gt_counts);
  report.per_category_ap.resize(scored.size());
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < scored.size(); ++c) {
    if (report.gt_counts[c] == 0) {
      continue;
    }
    // Stable: equal confidences keep image order.
    std::stable_sort(scored[c].begin(), scored[c].end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<bool> flags;
    flags.reserve(scored[c].size());
    for (const auto& [conf, tp] : scored[c]) {
      flags.push_back(tp);
    }
    const double ap = average_precision(flags, report.gt_counts[c]);
    report.per_category_ap[c] = ap;
    sum += ap;
    ++counted;
  }
  if (counted == 0) {
    throw ValidationError("mAP needs at least one ground-truth object");
  }
  report.map = sum / static_cast<double>(counted);
  return report;
}

std::vector<double> uniform_bin_edges(std::size_t bins) {
  if (bins == 0) {
    throw ValidationError("need at least one histogram bin");
  }
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    edges[i] = static_cast<double>(i) / static_cast<double>(bins);
  }
  return edges;
}

ConfidenceHistogram confidence_histogram(const Dataset& dataset, std::span<const double> bin_edges,
                                         double iou_threshold) {
  if (bin_edges.size() < 2) {
    throw ValidationError("histogram needs at least two bin edges");
  }
  if (bin_edges.front() != 0.0 || bin_edges.back() != 1.0) {
    throw ValidationError("histogram bin edges must span [0, 1]");
  }
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw ValidationError(fmt::format("histogram bin edges not strictly increasing at {}", i));
    }
  }
  if (!dataset.has_ground_truth()) {
    throw ValidationError("confidence histogram needs ground truth");
  }

  std::vector<std::size_t> gt_counts;
  const auto scored = scored_matches(dataset, iou_threshold, &gt_counts);
  const std::size_t gt_total = std::accumulate(gt_counts.begin(), gt_counts.end(), std::size_t{0});
  if (gt_total == 0) {
    throw ValidationError("confidence histogram needs at least one ground-truth object");
  }

  const std::size_t bins = bin_edges.size() - 1;
  std::vector<std::size_t> tp(bins, 0);
  std::vector<std::size_t> fp(bins, 0);
  std::size_t matched = 0;
  for (const auto& per_category : scored) {
    for (const auto& [conf, is_tp] : per_category) {
      auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), conf);
      std::size_t bin = static_cast<std::size_t>(it - bin_edges.begin());
      bin = bin == 0 ? 0 : std::min(bin - 1, bins - 1);
      if (is_tp) {
        ++tp[bin];
        ++matched;
      } else {
        ++fp[bin];
      }
    }
  }

  ConfidenceHistogram hist;
  hist.bin_edges.assign(bin_edges.begin(), bin_edges.end());
  hist.gt_total = gt_total;
  const auto denom = static_cast<double>(gt_total);
  for (std::size_t b = 0; b < bins; ++b) {
    hist.tp_ratio.push_back(static_cast<double>(tp[b]) / denom);
    hist.fp_ratio.push_back(static_cast<double>(fp[b]) / denom);
  }
  hist.fn_ratio = static_cast<double>(gt_total - matched) / denom;
  return hist;
}

}  // namespace sfod
