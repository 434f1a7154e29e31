#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfod/detection.hpp"
#include "sfod/errors.hpp"
#include "sfod/metrics.hpp"
#include "sfod/pseudo_label.hpp"
#include "sfod/random.hpp"

namespace sfod {

/// Anything that can fine-tune the source model on pseudo labels and
/// re-predict the target set. `train` always starts from the source model
/// and must be deterministic in (labels, seed); `predict` must copy ground
/// truth through untouched. Both are called concurrently when a sweep runs
/// on several threads.
template <class T>
concept SweepTrainer = requires(const T& trainer, const Dataset& target,
                                const PseudoLabelSet& labels, std::uint64_t seed,
                                const typename T::Model& model) {
  typename T::Model;
  { trainer.train(target, labels, seed) } -> std::same_as<typename T::Model>;
  { trainer.predict(model, target) } -> std::same_as<Dataset>;
};

struct SweepPoint {
  double threshold = 0.0;
  /// Empty when the retrained model emits no detection anywhere.
  std::optional<double> mean_self_entropy;
  /// Only for evaluation; selection never reads it.
  std::optional<double> map;
  std::size_t positives = 0;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

enum class SelectionKind { FirstLocalMinimum, GlobalMinimumFallback };

const char* to_string(SelectionKind kind);

struct Selection {
  std::size_t index = 0;
  double threshold = 0.0;
  SelectionKind kind = SelectionKind::GlobalMinimumFallback;

  friend bool operator==(const Selection&, const Selection&) = default;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  Selection selection;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

inline constexpr double kDefaultPlateauEpsilon = 1e-6;

struct SweepOptions {
  double plateau_epsilon = kDefaultPlateauEpsilon;
  /// Sweep points are independent; >1 trains them concurrently.
  std::size_t threads = 1;
};

/// Thrown when training or prediction fails at one grid point.
class SweepFailure : public RuntimeFailure {
 public:
  SweepFailure(double threshold, const std::string& what);
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

/// 0.9, 0.8, ..., 0.1
std::vector<double> default_threshold_grid();

/// Non-empty, strictly descending, inside [0,1].
void validate_threshold_grid(std::span<const double> grid);

/// Scans in sweep order for the first interior point that sits below its
/// predecessor by more than `plateau_epsilon` and no higher than its
/// successor plus `plateau_epsilon`. Falls back to the global minimum
/// (earliest on ties) when the curve has no such point. Points without an
/// entropy value never qualify and never count as a neighbor's witness.
Selection select_threshold(std::span<const SweepPoint> points,
                           double plateau_epsilon = kDefaultPlateauEpsilon);

/// Seed used to train the point at `threshold`; the final retrain reuses it.
inline std::uint64_t point_seed(std::uint64_t seed, double threshold) {
  return derive_seed(seed, threshold);
}

namespace detail {

template <SweepTrainer T>
std::pair<SweepPoint, typename T::Model> evaluate_point(const Dataset& target, const T& trainer,
                                                        double threshold, std::uint64_t seed) {
  try {
    const auto labels = generate_pseudo_labels(target, threshold);
    auto model = trainer.train(target, labels, point_seed(seed, threshold));
    const auto predicted = trainer.predict(model, target);
    SweepPoint point;
    point.threshold = threshold;
    point.positives = labels.positive_count();
    const bool any = std::any_of(predicted.images.begin(), predicted.images.end(),
                                 [](const ImageRecord& im) { return !im.detections.empty(); });
    if (any) {
      point.mean_self_entropy = mean_self_entropy(predicted).mean_self_entropy;
    }
    if (predicted.has_ground_truth()) {
      point.map = evaluate_map(predicted).map;
    }
    return {point, std::move(model)};
  } catch (const SweepFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw SweepFailure(threshold, e.what());
  }
}

}  // namespace detail

/// For every threshold: pseudo labels from the source detections in `target`,
/// train from the source model, re-predict, measure mean self-entropy.
template <SweepTrainer T>
std::vector<SweepPoint> run_sweep(const Dataset& target, const T& trainer,
                                  std::span<const double> grid, std::uint64_t seed,
                                  const SweepOptions& options = {}) {
  validate_threshold_grid(grid);
  std::vector<SweepPoint> points(grid.size());
  if (options.threads <= 1 || grid.size() == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      points[i] = detail::evaluate_point(target, trainer, grid[i], seed).first;
    }
    return points;
  }
  for (std::size_t start = 0; start < grid.size(); start += options.threads) {
    const std::size_t stop = std::min(grid.size(), start + options.threads);
    std::vector<std::future<SweepPoint>> pending;
    for (std::size_t i = start; i < stop; ++i) {
      pending.push_back(std::async(std::launch::async, [&, i] {
        return detail::evaluate_point(target, trainer, grid[i], seed).first;
      }));
    }
    // get() in grid order so the first failing threshold is the one reported.
    for (std::size_t i = start; i < stop; ++i) {
      points[i] = pending[i - start].get();
    }
  }
  return points;
}

template <class Model>
struct AdaptResult {
  Model model;
  SweepResult sweep;
  /// Metrics of the final model's re-prediction.
  std::optional<double> final_entropy;
  std::optional<double> final_map;
};

/// Sweep, pick h_optimal, retrain once from the source model at h_optimal.
template <SweepTrainer T>
AdaptResult<typename T::Model> adapt(const Dataset& target, const T& trainer,
                                     std::span<const double> grid, std::uint64_t seed,
                                     const SweepOptions& options = {}) {
  SweepResult sweep;
  sweep.points = run_sweep(target, trainer, grid, seed, options);
  sweep.selection = select_threshold(sweep.points, options.plateau_epsilon);
  auto [point, model] = detail::evaluate_point(target, trainer, sweep.selection.threshold, seed);
  return {std::move(model), std::move(sweep), point.mean_self_entropy, point.map};
}

}  // namespace sfod
