#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sfod/surrogate.hpp"

namespace sfod {

/// Two Gaussian blobs in the plane, one per class.
struct ToyConfig {
  std::size_t samples_per_class = 200;
  /// Class means sit at (+separation, +separation) and (-separation, -separation).
  double separation = 1.5;
  SgdConfig sgd{0.5, 20, 16, 0};

  void validate() const;
};

struct ToyPoint {
  double noise_degree = 0.0;
  /// Positives relabeled as negatives.
  double entropy_minus = 0.0;
  /// Negatives relabeled as positives.
  double entropy_plus = 0.0;
  /// Mean of the two directions.
  double entropy = 0.0;

  friend bool operator==(const ToyPoint&, const ToyPoint&) = default;
};

/// 0, 0.05, ..., 0.5
std::vector<double> default_noise_degrees();

/// For each degree and direction, relabels that share of one class, trains a
/// one-category surrogate from zero and records the mean self-entropy of its
/// predictions on the training points. Averaged over `trials` draws of the
/// data. Within a trial the relabeled sets are nested across degrees.
std::vector<ToyPoint> toy_noise_experiment(std::span<const double> noise_degrees,
                                           std::size_t trials, std::uint64_t seed,
                                           const ToyConfig& config = {});

}  // namespace sfod
