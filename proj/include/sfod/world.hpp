#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sfod/detection.hpp"

namespace sfod {

struct BetaShape {
  double alpha = 1.0;
  double beta = 1.0;
};

struct WorldConfig {
  std::size_t image_count = 100;
  std::size_t objects_min = 2;
  std::size_t objects_max = 6;
  std::size_t category_count = 3;
  /// Probability that an object's hardness comes from the easy component.
  double easy_share = 0.4;
  BetaShape easy_hardness{2.0, 6.0};
  BetaShape hard_hardness{7.0, 2.0};
  /// Clutter sits near the hard end so it competes with hard positives.
  BetaShape clutter_hardness{5.0, 3.0};
  /// Expected number of clutter candidates per image (Poisson).
  double clutter_rate = 12.0;
  /// Appearance cue: objects ~ N(+separation, spread), clutter ~ N(-separation, spread).
  double appearance_separation = 1.3;
  double appearance_spread = 1.0;
  /// Share of ground truth the source model leaves below the emission floor.
  double target_fn_share = 0.55;
  double canvas_width = 640.0;
  double canvas_height = 480.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A region the detector scores. Either derived from a ground-truth object
/// or clutter that matches nothing.
struct Candidate {
  BoundingBox box;
  /// Category the region resembles; for objects this is the true category.
  int cue = 0;
  /// Latent difficulty in [0,1]. Never read by the metrics.
  double hardness = 0.0;
  double appearance = 0.0;
  /// Index into the image's ground truth, -1 for clutter.
  int gt_index = -1;

  bool is_object() const { return gt_index >= 0; }
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// `dataset` carries ground truth and no detections; `candidates[i]` belongs
/// to `dataset.images[i]`.
struct WorldDataset {
  Dataset dataset;
  std::vector<std::vector<Candidate>> candidates;

  std::size_t object_count() const;
  friend bool operator==(const WorldDataset&, const WorldDataset&) = default;
};

/// Names for the first `count` categories.
std::vector<std::string> default_category_names(std::size_t count);

WorldDataset generate_world(const WorldConfig& config);

/// Checks shape consistency and that every object candidate points at a
/// ground-truth box of the same category.
void validate_world(const WorldDataset& world);

}  // namespace sfod
