#include "sfod/toy.hpp"

#include <cmath>
#include <numeric>

#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

#include "sfod/errors.hpp"
#include "sfod/metrics.hpp"
#include "sfod/random.hpp"

namespace sfod {

namespace {

constexpr int kPositive = 0;
constexpr int kNegative = 1;

void shuffle(std::vector<std::size_t>& v, CounterRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(rng.below(i))]);
  }
}

double mean_entropy(const SurrogateModel& model, const std::vector<TrainingExample>& points) {
  double total = 0.0;
  for (const auto& ex : points) {
    total += detection_self_entropy(model.probabilities(ex.x, 0));
  }
  return total / static_cast<double>(points.size());
}

}  // namespace

void ToyConfig::validate() const {
  if (samples_per_class == 0) {
    throw ValidationError("toy samples_per_class must be positive");
  }
  if (!std::isfinite(separation)) {
    throw ValidationError("toy separation must be finite");
  }
  sgd.validate();
}

std::vector<double> default_noise_degrees() {
  std::vector<double> out;
  for (int i = 0; i <= 10; ++i) {
    out.push_back(i / 20.0);
  }
  return out;
}

std::vector<ToyPoint> toy_noise_experiment(std::span<const double> noise_degrees,
                                           std::size_t trials, std::uint64_t seed,
                                           const ToyConfig& config) {
  config.validate();
  if (trials == 0) {
    throw ValidationError("toy experiment needs at least one trial");
  }
  for (double d : noise_degrees) {
    if (!(d >= 0.0 && d <= 0.5)) {
      throw ValidationError(fmt::format("noise degree {} outside [0,0.5]", d));
    }
  }
  const std::size_t n = config.samples_per_class;
  std::vector<ToyPoint> curve(noise_degrees.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    curve[i].noise_degree = noise_degrees[i];
  }

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto trial_seed = derive_seed(seed, static_cast<std::uint64_t>(trial));
    CounterRng rng(trial_seed);
    boost::random::normal_distribution<double> noise(0.0, 1.0);
    std::vector<TrainingExample> points;
    points.reserve(2 * n);
    for (std::size_t s = 0; s < 2 * n; ++s) {
      const bool positive = s < n;
      const double m = positive ? config.separation : -config.separation;
      const double x0 = m + noise(rng);
      const double x1 = m + noise(rng);
      points.push_back({{x0, x1}, 0, positive ? kPositive : kNegative});
    }
    std::vector<std::size_t> pos_order(n);
    std::vector<std::size_t> neg_order(n);
    std::iota(pos_order.begin(), pos_order.end(), std::size_t{0});
    std::iota(neg_order.begin(), neg_order.end(), n);
    shuffle(pos_order, rng);
    shuffle(neg_order, rng);

    for (std::size_t i = 0; i < noise_degrees.size(); ++i) {
      const auto flips = static_cast<std::size_t>(
          std::llround(noise_degrees[i] * static_cast<double>(n)));
      SgdConfig sgd = config.sgd;
      sgd.seed = derive_seed(trial_seed, noise_degrees[i]);
      for (int direction = 0; direction < 2; ++direction) {
        auto noisy = points;
        const auto& order = direction == 0 ? pos_order : neg_order;
        for (std::size_t f = 0; f < flips; ++f) {
          auto& ex = noisy[order[f]];
          ex.label = ex.label == kPositive ? kNegative : kPositive;
        }
        const auto model = train_on_examples(SurrogateModel::zero(1, 1.0, 0.0), noisy, sgd);
        const double h = mean_entropy(model, points);
        (direction == 0 ? curve[i].entropy_minus : curve[i].entropy_plus) += h;
      }
    }
  }
  for (auto& point : curve) {
    point.entropy_minus /= static_cast<double>(trials);
    point.entropy_plus /= static_cast<double>(trials);
    point.entropy = 0.5 * (point.entropy_minus + point.entropy_plus);
  }
  return curve;
}

}  // namespace sfod
