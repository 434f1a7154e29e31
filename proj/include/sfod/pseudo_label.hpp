#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sfod/detection.hpp"

namespace sfod {

struct PseudoLabel {
  BoundingBox box;
  int category = 0;
  /// Kept for auditing; always strictly above the set's threshold.
  double confidence = 0.0;

  friend bool operator==(const PseudoLabel&, const PseudoLabel&) = default;
};

struct ImagePseudoLabels {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::vector<PseudoLabel> positives;

  friend bool operator==(const ImagePseudoLabels&, const ImagePseudoLabels&) = default;
};

/// Detections promoted to training labels. Anything not listed is background.
struct PseudoLabelSet {
  double threshold = 0.0;
  std::vector<std::string> category_names;
  std::vector<ImagePseudoLabels> images;

  std::size_t positive_count() const;

  friend bool operator==(const PseudoLabelSet&, const PseudoLabelSet&) = default;
};

/// A detection becomes a positive when its max foreground probability is
/// strictly greater than `threshold`; boxes are passed through unchanged.
PseudoLabelSet generate_pseudo_labels(const Dataset& dataset, double threshold);

/// Keeps only positives above a (higher or equal) threshold.
PseudoLabelSet refilter(const PseudoLabelSet& labels, double threshold);

struct PseudoLabelStats {
  std::vector<std::size_t> per_category;
  std::size_t total = 0;
  double positives_per_image = 0.0;
};

PseudoLabelStats pseudo_label_stats(const PseudoLabelSet& labels);

}  // namespace sfod
