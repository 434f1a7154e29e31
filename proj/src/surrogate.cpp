#include "sfod/surrogate.hpp"

#include <cmath>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include <fmt/format.h>

#include "sfod/errors.hpp"
#include "sfod/random.hpp"

namespace sfod {

namespace {

constexpr int kBisectionSteps = 100;
constexpr double kBiasSearchLimit = 40.0;
constexpr std::uint64_t kMosaicStream = 0x6d6f73616963ULL;

/// Softmax over K+1 logits, written into `out`.
void softmax_into(const SurrogateModel& model, const Features& x, int cue,
                  std::vector<double>& out) {
  const std::size_t k = model.category_count();
  out.assign(k + 1, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = model.bias[j];
  }
  const auto c = static_cast<std::size_t>(cue);
  out[c] += model.weights[c][0] * x[0] + model.weights[c][1] * x[1];
  double top = 0.0;
  for (auto& v : out) {
    v /= model.temperature;
    top = std::max(top, v);
  }
  double sum = 0.0;
  for (auto& v : out) {
    v = std::exp(v - top);
    sum += v;
  }
  for (auto& v : out) {
    v /= sum;
  }
}

double max_foreground(const std::vector<double>& p) {
  return *std::max_element(p.begin(), p.end() - 1);
}

void check_cue(const SurrogateModel& model, int cue) {
  if (cue < 0 || static_cast<std::size_t>(cue) >= model.category_count()) {
    throw ValidationError(fmt::format("cue {} outside the model's {} categories", cue,
                                      model.category_count()));
  }
}

}  // namespace

bool SurrogateModel::is_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  for (const auto& w : weights) {
    if (!std::all_of(w.begin(), w.end(), finite)) {
      return false;
    }
  }
  return std::all_of(bias.begin(), bias.end(), finite) && std::isfinite(temperature) &&
         std::isfinite(emission_floor);
}

void SurrogateModel::validate() const {
  if (bias.empty() || weights.size() != bias.size()) {
    throw ValidationError(fmt::format("surrogate model has {} weight rows and {} biases",
                                      weights.size(), bias.size()));
  }
  if (!is_finite()) {
    throw ValidationError("surrogate model has non-finite parameters");
  }
  if (!(temperature > 0.0)) {
    throw ValidationError("surrogate temperature must be positive");
  }
  if (!(emission_floor >= 0.0 && emission_floor <= 1.0)) {
    throw ValidationError("emission floor must lie in [0,1]");
  }
}

ProbVector SurrogateModel::probabilities(const Features& x, int cue) const {
  check_cue(*this, cue);
  std::vector<double> p;
  softmax_into(*this, x, cue, p);
  return ProbVector(std::move(p));
}

SurrogateModel SurrogateModel::zero(std::size_t category_count, double temperature,
                                    double emission_floor) {
  SurrogateModel m;
  m.weights.assign(category_count, Features{0.0, 0.0});
  m.bias.assign(category_count, 0.0);
  m.temperature = temperature;
  m.emission_floor = emission_floor;
  m.validate();
  return m;
}

Dataset predict(const SurrogateModel& model, const WorldDataset& world) {
  model.validate();
  if (model.category_count() != world.dataset.category_count()) {
    throw ValidationError(fmt::format("model has {} categories, world has {}",
                                      model.category_count(), world.dataset.category_count()));
  }
  Dataset out = world.dataset;
  std::vector<double> p;
  for (std::size_t i = 0; i < out.images.size(); ++i) {
    auto& image = out.images[i];
    image.detections.clear();
    for (const auto& cand : world.candidates[i]) {
      check_cue(model, cand.cue);
      softmax_into(model, candidate_features(cand), cand.cue, p);
      if (max_foreground(p) >= model.emission_floor) {
        image.detections.emplace_back(cand.box, ProbVector(p));
      }
    }
  }
  return out;
}

double false_negative_share(const SurrogateModel& model, const WorldDataset& world) {
  model.validate();
  std::size_t objects = 0;
  std::size_t missed = 0;
  std::vector<double> p;
  for (const auto& cands : world.candidates) {
    for (const auto& cand : cands) {
      if (!cand.is_object()) {
        continue;
      }
      ++objects;
      softmax_into(model, candidate_features(cand), cand.cue, p);
      if (max_foreground(p) < model.emission_floor) {
        ++missed;
      }
    }
  }
  const std::size_t total = world.object_count();
  // Objects that never got a candidate are missed too.
  missed += total - objects;
  return total == 0 ? 0.0 : static_cast<double>(missed) / static_cast<double>(total);
}

SurrogateModel make_source_model(const WorldDataset& world, double target_fn_share,
                                 const SourceModelConfig& config) {
  if (!(target_fn_share >= 0.0 && target_fn_share < 1.0)) {
    throw ValidationError(fmt::format("target_fn_share {} outside [0,1)", target_fn_share));
  }
  const std::size_t k = world.dataset.category_count();
  auto with_bias = [&](double b) {
    SurrogateModel m;
    m.weights.assign(k, config.weights);
    m.bias.assign(k, b);
    m.temperature = config.temperature;
    m.emission_floor = config.emission_floor;
    return m;
  };
  // The share only falls as the bias grows. Keep share(lo) >= target > share(hi).
  double lo = -kBiasSearchLimit;
  double hi = kBiasSearchLimit;
  if (false_negative_share(with_bias(hi), world) >= target_fn_share) {
    return with_bias(hi);
  }
  for (int step = 0; step < kBisectionSteps; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (false_negative_share(with_bias(mid), world) >= target_fn_share) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return with_bias(lo);
}

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError(fmt::format("learning_rate {} must be positive", learning_rate));
  }
  if (batch_size == 0) {
    throw ValidationError("batch_size must be positive");
  }
}

std::vector<TrainingExample> training_examples(const WorldDataset& world,
                                               const PseudoLabelSet& labels) {
  const int background = static_cast<int>(world.dataset.category_count());
  std::unordered_map<std::string_view, std::size_t> by_id;
  for (std::size_t i = 0; i < labels.images.size(); ++i) {
    by_id.emplace(labels.images[i].image_id, i);
  }
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < world.candidates.size(); ++i) {
    const auto& image = world.dataset.images[i];
    const auto& cands = world.candidates[i];
    std::vector<int> label(cands.size(), background);
    if (auto it = by_id.find(image.id); it != by_id.end()) {
      std::vector<bool> claimed(cands.size(), false);
      for (const auto& pos : labels.images[it->second].positives) {
        std::size_t c = 0;
        while (c < cands.size() && (claimed[c] || !(cands[c].box == pos.box))) {
          ++c;
        }
        if (c == cands.size()) {
          throw ValidationError(fmt::format(
              "image '{}': pseudo label box matches no candidate of this world", image.id));
        }
        if (pos.category < 0 || pos.category >= background) {
          throw ValidationError(fmt::format("image '{}': pseudo label category {} out of range",
                                            image.id, pos.category));
        }
        claimed[c] = true;
        label[c] = pos.category;
      }
    }
    for (std::size_t c = 0; c < cands.size(); ++c) {
      out.push_back({candidate_features(cands[c]), cands[c].cue, label[c]});
    }
  }
  return out;
}

double cross_entropy(const SurrogateModel& model, std::span<const TrainingExample> examples) {
  if (examples.empty()) {
    return 0.0;
  }
  std::vector<double> p;
  double total = 0.0;
  for (const auto& ex : examples) {
    check_cue(model, ex.cue);
    softmax_into(model, ex.x, ex.cue, p);
    total -= std::log(std::max(p[static_cast<std::size_t>(ex.label)], 1e-300));
  }
  return total / static_cast<double>(examples.size());
}

SurrogateModel train_on_examples(SurrogateModel model, std::span<const TrainingExample> examples,
                                 const SgdConfig& config, TrainingTrace* trace) {
  config.validate();
  model.validate();
  const std::size_t k = model.category_count();
  for (const auto& ex : examples) {
    check_cue(model, ex.cue);
    if (ex.label < 0 || static_cast<std::size_t>(ex.label) > k) {
      throw ValidationError(fmt::format("training label {} out of range", ex.label));
    }
  }
  if (trace) {
    trace->epoch_loss.assign(1, cross_entropy(model, examples));
  }
  if (examples.empty()) {
    return model;
  }

  std::vector<std::size_t> order(examples.size());
  std::vector<double> p;
  std::vector<double> grad_bias(k);
  std::vector<Features> grad_w(k);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / (model.temperature * static_cast<double>(stop - start));
      std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
      std::fill(grad_w.begin(), grad_w.end(), Features{0.0, 0.0});
      for (std::size_t n = start; n < stop; ++n) {
        const auto& ex = examples[order[n]];
        softmax_into(model, ex.x, ex.cue, p);
        p[static_cast<std::size_t>(ex.label)] -= 1.0;
        for (std::size_t j = 0; j < k; ++j) {
          grad_bias[j] += p[j] * scale;
        }
        const auto c = static_cast<std::size_t>(ex.cue);
        grad_w[c][0] += p[c] * ex.x[0] * scale;
        grad_w[c][1] += p[c] * ex.x[1] * scale;
      }
      for (std::size_t j = 0; j < k; ++j) {
        model.bias[j] -= config.learning_rate * grad_bias[j];
        model.weights[j][0] -= config.learning_rate * grad_w[j][0];
        model.weights[j][1] -= config.learning_rate * grad_w[j][1];
      }
    }
    if (!model.is_finite()) {
      throw RuntimeFailure(fmt::format("training diverged in epoch {}", epoch));
    }
    if (trace) {
      trace->epoch_loss.push_back(cross_entropy(model, examples));
    }
  }
  return model;
}

SurrogateModel train_surrogate(const SurrogateModel& model, const WorldDataset& world,
                               const PseudoLabelSet& labels, const SgdConfig& config,
                               TrainingTrace* trace) {
  const auto examples = training_examples(world, labels);
  return train_on_examples(model, examples, config, trace);
}

std::vector<TrainingExample> mosaic_training_examples(const WorldDataset& world,
                                                      const PseudoLabelSet& labels,
                                                      const MosaicTrainingConfig& config,
                                                      std::uint64_t seed) {
  if (!(config.mix_ratio >= 0.0) || !std::isfinite(config.mix_ratio)) {
    throw ValidationError(fmt::format("mosaic mix_ratio {} invalid", config.mix_ratio));
  }
  const auto base = training_examples(world, labels);
  // Candidate boxes carry their training label as the category; background
  // uses the extra index so it survives composition like any other box.
  std::vector<std::vector<LabeledBox>> boxes(world.candidates.size());
  std::vector<std::size_t> first(world.candidates.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < world.candidates.size(); ++i) {
    first[i] = cursor;
    for (const auto& cand : world.candidates[i]) {
      boxes[i].push_back({cand.box, base[cursor].label});
      ++cursor;
    }
  }
  std::vector<MosaicInput> pool;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& image = world.dataset.images[i];
    pool.push_back({image.id, image.width, image.height, boxes[i]});
  }
  const auto count = static_cast<std::size_t>(
      std::llround(config.mix_ratio * static_cast<double>(world.candidates.size())));
  if (count == 0) {
    return {};
  }
  const auto samples = mosaic_batch(pool, count, config.mosaic, seed);

  std::vector<TrainingExample> out;
  for (const auto& sample : samples) {
    for (const auto& label : sample.labels) {
      const auto& tile = sample.tiles[label.tile];
      auto ex = base[first[tile.source_slot] + label.source_index];
      ex.x[0] = harden_visibility(ex.x[0], tile.scale, label.visible_fraction);
      out.push_back(ex);
    }
  }
  return out;
}

SurrogateTrainer::SurrogateTrainer(std::shared_ptr<const WorldDataset> world,
                                   SurrogateModel source, SgdConfig sgd,
                                   std::optional<MosaicTrainingConfig> mosaic)
    : world_(std::move(world)),
      source_(std::move(source)),
      sgd_(sgd),
      mosaic_(std::move(mosaic)) {
  if (!world_) {
    throw ValidationError("trainer needs a world");
  }
  source_.validate();
  sgd_.validate();
  if (mosaic_) {
    mosaic_->mosaic.validate();
  }
}

void SurrogateTrainer::check_target(const Dataset& target) const {
  const auto& images = world_->dataset.images;
  if (target.images.size() != images.size()) {
    throw ValidationError(fmt::format("target has {} images, trainer world has {}",
                                      target.images.size(), images.size()));
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (target.images[i].id != images[i].id) {
      throw ValidationError(fmt::format("target image {} is '{}', trainer world expects '{}'", i,
                                        target.images[i].id, images[i].id));
    }
  }
}

SurrogateModel SurrogateTrainer::train(const Dataset& target, const PseudoLabelSet& labels,
                                       std::uint64_t seed) const {
  check_target(target);
  auto examples = training_examples(*world_, labels);
  if (mosaic_) {
    auto extra = mosaic_training_examples(*world_, labels, *mosaic_,
                                          derive_seed(seed, kMosaicStream));
    examples.insert(examples.end(), extra.begin(), extra.end());
  }
  SgdConfig cfg = sgd_;
  cfg.seed = seed;
  return train_on_examples(source_, examples, cfg);
}

Dataset SurrogateTrainer::predict(const SurrogateModel& model, const Dataset& target) const {
  check_target(target);
  auto out = sfod::predict(model, *world_);
  out.category_names = target.category_names;
  for (std::size_t i = 0; i < out.images.size(); ++i) {
    out.images[i].ground_truth = target.images[i].ground_truth;
  }
  return out;
}

}  // namespace sfod
