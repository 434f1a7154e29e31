#include "sfod/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sfod/errors.hpp"

namespace sfod {

ProbVector::ProbVector(std::vector<double> probabilities) : values_(std::move(probabilities)) {
  if (values_.size() < 2) {
    throw ValidationError("probability vector needs at least one foreground and the background entry");
  }
  double sum = 0.0;
  for (double p : values_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError(fmt::format("probability entry {} is negative or non-finite", p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw ValidationError(fmt::format("probability vector sums to {:.12g}, expected 1", sum));
  }
}

std::size_t ProbVector::argmax_foreground() const {
  const auto end = values_.end() - 1;
  return static_cast<std::size_t>(std::max_element(values_.begin(), end) - values_.begin());
}

Detection::Detection(BoundingBox box, ProbVector probs)
    : box_(box),
      probs_(std::move(probs)),
      confidence_(probs_.max_foreground()),
      category_(static_cast<int>(probs_.argmax_foreground())) {}

bool Dataset::has_ground_truth() const {
  return std::any_of(images.begin(), images.end(),
                     [](const ImageRecord& im) { return im.ground_truth.has_value(); });
}

void validate_dataset(const Dataset& dataset) {
  const auto n_categories = dataset.category_count();
  if (n_categories == 0) {
    throw ValidationError("dataset has no categories");
  }
  for (const auto& image : dataset.images) {
    if (!(image.width > 0.0) || !(image.height > 0.0)) {
      throw ValidationError(fmt::format("image '{}': width/height must be positive", image.id));
    }
    for (std::size_t i = 0; i < image.detections.size(); ++i) {
      const auto& det = image.detections[i];
      if (!det.box().inside(image.width, image.height)) {
        throw ValidationError(
            fmt::format("image '{}': detections[{}].box lies outside the canvas", image.id, i));
      }
      if (det.probs().size() != n_categories + 1) {
        throw ValidationError(fmt::format(
            "image '{}': detections[{}].probs has {} entries, expected {}", image.id, i,
            det.probs().size(), n_categories + 1));
      }
    }
    if (image.ground_truth) {
      for (std::size_t i = 0; i < image.ground_truth->size(); ++i) {
        const auto& gt = (*image.ground_truth)[i];
        if (!gt.box.inside(image.width, image.height)) {
          throw ValidationError(fmt::format(
              "image '{}': ground_truth[{}].box lies outside the canvas", image.id, i));
        }
        if (gt.category < 0 || static_cast<std::size_t>(gt.category) >= n_categories) {
          throw ValidationError(fmt::format("image '{}': ground_truth[{}].category {} out of range",
                                            image.id, i, gt.category));
        }
      }
    }
  }
}

std::vector<Detection> sorted_by_confidence(std::span<const Detection> detections) {
  std::vector<Detection> out(detections.begin(), detections.end());
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return a.confidence() > b.confidence();
  });
  return out;
}

}  // namespace sfod
