#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sfod/detection.hpp"
#include "sfod/mosaic.hpp"
#include "sfod/pseudo_label.hpp"
#include "sfod/world.hpp"

namespace sfod {

inline constexpr std::size_t kFeatureCount = 2;

/// (visibility = 1 - hardness, appearance)
using Features = std::array<double, kFeatureCount>;

inline Features candidate_features(const Candidate& c) { return {1.0 - c.hardness, c.appearance}; }

/// Per-category logistic scorer. For a candidate cued as category c the
/// logit of c is bias[c] + weights[c]·x, every other category gets its bias
/// alone and background is pinned at 0. Logits are divided by the
/// temperature before the softmax.
struct SurrogateModel {
  std::vector<Features> weights;
  std::vector<double> bias;
  double temperature = 1.0;
  /// Candidates whose confidence falls below this are never emitted.
  double emission_floor = 0.1;

  std::size_t category_count() const { return bias.size(); }
  bool is_finite() const;
  /// Throws ValidationError on shape mismatch or non-finite parameters.
  void validate() const;

  ProbVector probabilities(const Features& x, int cue) const;

  static SurrogateModel zero(std::size_t category_count, double temperature = 1.0,
                             double emission_floor = 0.1);

  friend bool operator==(const SurrogateModel&, const SurrogateModel&) = default;
};

/// Ground truth copied through; one detection per candidate at or above the
/// emission floor, in candidate order.
Dataset predict(const SurrogateModel& model, const WorldDataset& world);

struct SourceModelConfig {
  Features weights{7.5, 0.15};
  double temperature = 1.0;
  double emission_floor = 0.1;
};

/// Share of object candidates below the emission floor.
double false_negative_share(const SurrogateModel& model, const WorldDataset& world);

/// Source model with a shared bias found by bisection so that its
/// false-negative share lands on `target_fn_share` (from above when the
/// share jumps over the target).
SurrogateModel make_source_model(const WorldDataset& world, double target_fn_share,
                                 const SourceModelConfig& config = {});

struct SgdConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 8;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingExample {
  Features x{};
  int cue = 0;
  /// Category index, or category_count for background.
  int label = 0;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

/// Every candidate in candidate order. A candidate whose box equals a pseudo
/// positive's box takes that positive's category; the rest are background.
std::vector<TrainingExample> training_examples(const WorldDataset& world,
                                               const PseudoLabelSet& labels);

/// Mean softmax cross-entropy.
double cross_entropy(const SurrogateModel& model, std::span<const TrainingExample> examples);

struct TrainingTrace {
  /// Loss over the full example set before training, then after each epoch.
  std::vector<double> epoch_loss;
};

SurrogateModel train_on_examples(SurrogateModel model, std::span<const TrainingExample> examples,
                                 const SgdConfig& config, TrainingTrace* trace = nullptr);

SurrogateModel train_surrogate(const SurrogateModel& model, const WorldDataset& world,
                               const PseudoLabelSet& labels, const SgdConfig& config,
                               TrainingTrace* trace = nullptr);

struct MosaicTrainingConfig {
  MosaicConfig mosaic;
  /// Mosaic samples per target image.
  double mix_ratio = 1.0;
};

/// Shrinking and cropping make an object harder to see; appearance is kept.
inline double harden_visibility(double visibility, double scale, double visible_fraction) {
  return visibility * std::min(1.0, scale) * visible_fraction;
}

/// Candidates of four target images composed on one canvas. Each surviving
/// candidate keeps its label and cue; its visibility is hardened.
std::vector<TrainingExample> mosaic_training_examples(const WorldDataset& world,
                                                      const PseudoLabelSet& labels,
                                                      const MosaicTrainingConfig& config,
                                                      std::uint64_t seed);

/// Fine-tunes the source model on a shared world.
class SurrogateTrainer {
 public:
  using Model = SurrogateModel;

  SurrogateTrainer(std::shared_ptr<const WorldDataset> world, SurrogateModel source,
                   SgdConfig sgd, std::optional<MosaicTrainingConfig> mosaic = std::nullopt);

  /// `target` must list the world's images in order.
  SurrogateModel train(const Dataset& target, const PseudoLabelSet& labels,
                       std::uint64_t seed) const;
  Dataset predict(const SurrogateModel& model, const Dataset& target) const;

  const SurrogateModel& source_model() const { return source_; }
  const WorldDataset& world() const { return *world_; }

 private:
  void check_target(const Dataset& target) const;

  std::shared_ptr<const WorldDataset> world_;
  SurrogateModel source_;
  SgdConfig sgd_;
  std::optional<MosaicTrainingConfig> mosaic_;
};

}  // namespace sfod
