#include "sfod/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <fmt/format.h>

#include "sfod/errors.hpp"
#include "sfod/random.hpp"

namespace sfod {

namespace {

constexpr int kPlacementAttempts = 40;
constexpr double kMaxOverlap = 0.3;
constexpr double kCandidateJitter = 0.05;

bool valid_shape(const BetaShape& s) {
  return std::isfinite(s.alpha) && std::isfinite(s.beta) && s.alpha > 0.0 && s.beta > 0.0;
}

double draw_beta(CounterRng& rng, const BetaShape& shape) {
  boost::random::beta_distribution<double> dist(shape.alpha, shape.beta);
  return std::clamp(dist(rng), 0.0, 1.0);
}

double draw_normal(CounterRng& rng, double mean, double sd) {
  boost::random::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

/// Harder regions are smaller.
BoundingBox draw_box(CounterRng& rng, double hardness, double w, double h) {
  const double base = std::min(w, h);
  const double width = base * (0.30 - 0.22 * hardness) * rng.uniform(0.8, 1.2);
  const double height = std::min(width * rng.uniform(0.6, 1.6), 0.9 * h);
  const double x0 = rng.uniform(0.0, w - width);
  const double y0 = rng.uniform(0.0, h - height);
  return {x0, y0, x0 + width, y0 + height};
}

bool overlaps(const BoundingBox& box, const std::vector<BoundingBox>& others) {
  return std::any_of(others.begin(), others.end(),
                     [&](const BoundingBox& o) { return iou(box, o) >= kMaxOverlap; });
}

std::optional<BoundingBox> place(CounterRng& rng, double hardness, double w, double h,
                                 const std::vector<BoundingBox>& taken) {
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    auto box = draw_box(rng, hardness, w, h);
    if (!overlaps(box, taken)) {
      return box;
    }
  }
  return std::nullopt;
}

BoundingBox jitter(CounterRng& rng, const BoundingBox& gt, double w, double h) {
  const double jx = kCandidateJitter * gt.width();
  const double jy = kCandidateJitter * gt.height();
  const double x0 = std::max(0.0, gt.x_min() + rng.uniform(-jx, jx));
  const double y0 = std::max(0.0, gt.y_min() + rng.uniform(-jy, jy));
  const double x1 = std::min(w, gt.x_max() + rng.uniform(-jx, jx));
  const double y1 = std::min(h, gt.y_max() + rng.uniform(-jy, jy));
  return {x0, y0, x1, y1};
}

}  // namespace

void WorldConfig::validate() const {
  if (image_count == 0) {
    throw ValidationError("world image_count must be positive");
  }
  if (objects_min == 0 || objects_max < objects_min) {
    throw ValidationError(
        fmt::format("world objects range [{}, {}] invalid", objects_min, objects_max));
  }
  if (category_count == 0) {
    throw ValidationError("world category_count must be positive");
  }
  if (!(easy_share >= 0.0 && easy_share <= 1.0)) {
    throw ValidationError(fmt::format("easy_share {} outside [0,1]", easy_share));
  }
  if (!valid_shape(easy_hardness) || !valid_shape(hard_hardness) ||
      !valid_shape(clutter_hardness)) {
    throw ValidationError("hardness beta shapes must be positive and finite");
  }
  if (!(clutter_rate >= 0.0) || !std::isfinite(clutter_rate)) {
    throw ValidationError(fmt::format("clutter_rate {} invalid", clutter_rate));
  }
  if (!std::isfinite(appearance_separation) || !(appearance_spread > 0.0) ||
      !std::isfinite(appearance_spread)) {
    throw ValidationError("appearance parameters invalid");
  }
  if (!(target_fn_share >= 0.0 && target_fn_share < 1.0)) {
    throw ValidationError(fmt::format("target_fn_share {} outside [0,1)", target_fn_share));
  }
  if (!(canvas_width >= 16.0) || !(canvas_height >= 16.0) || !std::isfinite(canvas_width) ||
      !std::isfinite(canvas_height)) {
    throw ValidationError(
        fmt::format("degenerate canvas {}x{}", canvas_width, canvas_height));
  }
}

std::size_t WorldDataset::object_count() const {
  std::size_t n = 0;
  for (const auto& image : dataset.images) {
    n += image.ground_truth ? image.ground_truth->size() : 0;
  }
  return n;
}

std::vector<std::string> default_category_names(std::size_t count) {
  static const std::array<const char*, 8> names{"car",   "person", "rider",   "truck",
                                                "bus",   "train",  "bicycle", "motorcycle"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i < names.size() ? std::string(names[i]) : fmt::format("class_{}", i));
  }
  return out;
}

WorldDataset generate_world(const WorldConfig& config) {
  config.validate();
  const double w = config.canvas_width;
  const double h = config.canvas_height;
  const auto k = static_cast<std::uint64_t>(config.category_count);

  WorldDataset world;
  world.dataset.category_names = default_category_names(config.category_count);
  world.dataset.images.reserve(config.image_count);
  world.candidates.reserve(config.image_count);

  for (std::size_t i = 0; i < config.image_count; ++i) {
    CounterRng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i)));
    ImageRecord image;
    image.id = fmt::format("img{:05d}", i);
    image.width = w;
    image.height = h;
    std::vector<LabeledBox> truth;
    std::vector<Candidate> candidates;
    std::vector<BoundingBox> taken;

    const auto span = static_cast<std::uint64_t>(config.objects_max - config.objects_min + 1);
    const auto n_objects = config.objects_min + static_cast<std::size_t>(rng.below(span));
    for (std::size_t o = 0; o < n_objects; ++o) {
      const int category = static_cast<int>(rng.below(k));
      const bool easy = rng.uniform() < config.easy_share;
      const double hardness = draw_beta(rng, easy ? config.easy_hardness : config.hard_hardness);
      const double appearance =
          draw_normal(rng, config.appearance_separation, config.appearance_spread);
      auto box = place(rng, hardness, w, h, taken);
      if (!box) {
        continue;
      }
      taken.push_back(*box);
      candidates.push_back({jitter(rng, *box, w, h), category, hardness, appearance,
                            static_cast<int>(truth.size())});
      truth.push_back({*box, category});
    }

    boost::random::poisson_distribution<int, double> clutter_count(
        std::max(config.clutter_rate, 1e-12));
    const int n_clutter = config.clutter_rate > 0.0 ? clutter_count(rng) : 0;
    for (int c = 0; c < n_clutter; ++c) {
      const int cue = static_cast<int>(rng.below(k));
      const double hardness = draw_beta(rng, config.clutter_hardness);
      const double appearance =
          draw_normal(rng, -config.appearance_separation, config.appearance_spread);
      auto box = place(rng, hardness, w, h, taken);
      if (!box) {
        continue;
      }
      taken.push_back(*box);
      candidates.push_back({*box, cue, hardness, appearance, -1});
    }

    image.ground_truth = std::move(truth);
    world.dataset.images.push_back(std::move(image));
    world.candidates.push_back(std::move(candidates));
  }
  return world;
}

void validate_world(const WorldDataset& world) {
  validate_dataset(world.dataset);
  if (world.candidates.size() != world.dataset.images.size()) {
    throw ValidationError(fmt::format("world has {} images but {} candidate lists",
                                      world.dataset.images.size(), world.candidates.size()));
  }
  const auto k = static_cast<int>(world.dataset.category_count());
  for (std::size_t i = 0; i < world.candidates.size(); ++i) {
    const auto& image = world.dataset.images[i];
    const auto& truth = image.ground_truth;
    for (std::size_t c = 0; c < world.candidates[i].size(); ++c) {
      const auto& cand = world.candidates[i][c];
      const auto where = [&] { return fmt::format("image '{}' candidate {}", image.id, c); };
      if (!(cand.hardness >= 0.0 && cand.hardness <= 1.0)) {
        throw ValidationError(where() + ": hardness outside [0,1]");
      }
      if (!std::isfinite(cand.appearance)) {
        throw ValidationError(where() + ": appearance not finite");
      }
      if (cand.cue < 0 || cand.cue >= k) {
        throw ValidationError(where() + ": cue category out of range");
      }
      if (!cand.box.inside(image.width, image.height)) {
        throw ValidationError(where() + ": box outside canvas");
      }
      if (cand.is_object()) {
        if (!truth || static_cast<std::size_t>(cand.gt_index) >= truth->size()) {
          throw ValidationError(where() + ": gt_index has no ground-truth box");
        }
        if ((*truth)[static_cast<std::size_t>(cand.gt_index)].category != cand.cue) {
          throw ValidationError(where() + ": cue differs from ground-truth category");
        }
      } else if (cand.gt_index != -1) {
        throw ValidationError(where() + ": gt_index must be -1 or a valid index");
      }
    }
  }
}

}  // namespace sfod
