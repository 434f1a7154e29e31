#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfod/box.hpp"

namespace sfod {

/// Softmax output over the foreground categories followed by one background
/// entry. Entries are finite, non-negative and sum to 1 within 1e-9.
class ProbVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit ProbVector(std::vector<double> probabilities);

  std::size_t size() const { return values_.size(); }
  std::size_t foreground_count() const { return values_.size() - 1; }
  double operator[](std::size_t i) const { return values_[i]; }
  double background() const { return values_.back(); }
  std::span<const double> values() const { return values_; }

  /// Index of the largest foreground entry (lowest index on ties).
  std::size_t argmax_foreground() const;
  double max_foreground() const { return values_[argmax_foreground()]; }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> values_;
};

class Detection {
 public:
  Detection(BoundingBox box, ProbVector probs);

  const BoundingBox& box() const { return box_; }
  const ProbVector& probs() const { return probs_; }
  /// Max foreground probability.
  double confidence() const { return confidence_; }
  /// Foreground index that attains the confidence.
  int category() const { return category_; }

  friend bool operator==(const Detection&, const Detection&) = default;

 private:
  BoundingBox box_;
  ProbVector probs_;
  double confidence_;
  int category_;
};

struct LabeledBox {
  BoundingBox box;
  int category = 0;

  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

struct ImageRecord {
  std::string id;
  double width = 0.0;
  double height = 0.0;
  std::vector<Detection> detections;
  std::optional<std::vector<LabeledBox>> ground_truth;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Dataset {
  std::vector<ImageRecord> images;
  std::vector<std::string> category_names;

  std::size_t category_count() const { return category_names.size(); }
  bool has_ground_truth() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Checks canvas containment, category ranges and probability vector lengths.
/// Throws ValidationError naming the offending image and field.
void validate_dataset(const Dataset& dataset);

/// Detections sorted by descending confidence; ties keep their input order.
std::vector<Detection> sorted_by_confidence(std::span<const Detection> detections);

}  // namespace sfod
