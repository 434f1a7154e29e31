#include "sfod/pseudo_label.hpp"

#include <fmt/format.h>

#include "sfod/errors.hpp"

namespace sfod {
namespace {

void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError(fmt::format("confidence threshold {} outside [0,1]", threshold));
  }
}

}  // namespace

std::size_t PseudoLabelSet::positive_count() const {
  std::size_t n = 0;
  for (const auto& image : images) {
    n += image.positives.size();
  }
  return n;
}

PseudoLabelSet generate_pseudo_labels(const Dataset& dataset, double threshold) {
  check_threshold(threshold);
  PseudoLabelSet out;
  out.threshold = threshold;
  out.category_names = dataset.category_names;
  out.images.reserve(dataset.images.size());
  for (const auto& image : dataset.images) {
    ImagePseudoLabels labels{image.id, image.width, image.height, {}};
    for (const auto& det : image.detections) {
      if (det.confidence() > threshold) {
        labels.positives.push_back({det.box(), det.category(), det.confidence()});
      }
    }
    out.images.push_back(std::move(labels));
  }
  return out;
}

PseudoLabelSet refilter(const PseudoLabelSet& labels, double threshold) {
  check_threshold(threshold);
  if (threshold < labels.threshold) {
    throw ValidationError("cannot refilter pseudo labels at a lower threshold than they were built with");
  }
  PseudoLabelSet out;
  out.threshold = threshold;
  out.category_names = labels.category_names;
  for (const auto& image : labels.images) {
    ImagePseudoLabels kept{image.image_id, image.width, image.height, {}};
    for (const auto& label : image.positives) {
      if (label.confidence > threshold) {
        kept.positives.push_back(label);
      }
    }
    out.images.push_back(std::move(kept));
  }
  return out;
}

PseudoLabelStats pseudo_label_stats(const PseudoLabelSet& labels) {
  PseudoLabelStats stats;
  stats.per_category.assign(labels.category_names.size(), 0);
  for (const auto& image : labels.images) {
    for (const auto& label : image.positives) {
      if (label.category < 0 || static_cast<std::size_t>(label.category) >= stats.per_category.size()) {
        throw ValidationError(fmt::format("image '{}': pseudo label category {} out of range",
                                          image.image_id, label.category));
      }
      ++stats.per_category[static_cast<std::size_t>(label.category)];
      ++stats.total;
    }
  }
  stats.positives_per_image =
      labels.images.empty() ? 0.0
                            : static_cast<double>(stats.total) / static_cast<double>(labels.images.size());
  return stats;
}

}  // namespace sfod
