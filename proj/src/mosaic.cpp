#include "sfod/mosaic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sfod/errors.hpp"

namespace sfod {

const char* to_string(Quadrant q) {
  switch (q) {
    case Quadrant::TopLeft:
      return "top-left";
    case Quadrant::TopRight:
      return "top-right";
    case Quadrant::BottomLeft:
      return "bottom-left";
    case Quadrant::BottomRight:
      return "bottom-right";
  }
  return "unknown";
}

void MosaicConfig::validate() const {
  if (!(canvas_width > 0.0) || !(canvas_height > 0.0)) {
    throw ValidationError("mosaic canvas must have positive size");
  }
  if (!(lambda_min > 0.0) || !(lambda_max < 1.0) || !(lambda_min <= lambda_max)) {
    throw ValidationError(
        fmt::format("mosaic lambda range [{}, {}] must be a non-empty subset of (0,1)", lambda_min,
                    lambda_max));
  }
  if (!(scale_min > 0.0) || !(scale_min <= scale_max) || !std::isfinite(scale_max)) {
    throw ValidationError(fmt::format("mosaic scale range [{}, {}] invalid", scale_min, scale_max));
  }
  if (!(min_visible_area_ratio > 0.0) || !(min_visible_area_ratio <= 1.0)) {
    throw ValidationError("min_visible_area_ratio must lie in (0,1]");
  }
}

std::optional<TransformedBox> transform_label(const BoundingBox& box, double scale,
                                              double offset_x, double offset_y,
                                              const BoundingBox& crop_window,
                                              double min_visible_area_ratio) {
  if (!(scale > 0.0)) {
    throw ValidationError("transform scale must be positive");
  }
  const auto moved = box.scaled_translated(scale, offset_x, offset_y);
  const auto visible = intersect(moved, crop_window);
  if (!visible) {
    return std::nullopt;
  }
  if (*visible == moved) {
    return TransformedBox{moved, 1.0};
  }
  const double fraction = visible->area() / moved.area();
  if (fraction < min_visible_area_ratio) {
    return std::nullopt;
  }
  return TransformedBox{*visible, fraction};
}

MosaicDraw draw_mosaic(const MosaicConfig& config, CounterRng& rng) {
  MosaicDraw draw;
  draw.lambda_x = rng.uniform(config.lambda_min, config.lambda_max);
  draw.lambda_y = rng.uniform(config.lambda_min, config.lambda_max);
  for (auto& s : draw.scales) {
    s = rng.uniform(config.scale_min, config.scale_max);
  }
  return draw;
}

MosaicSample compose_mosaic(std::span<const MosaicInput, 4> inputs, const MosaicConfig& config,
                            const MosaicDraw& draw) {
  config.validate();
  const double w = config.canvas_width;
  const double h = config.canvas_height;
  const double sx = draw.lambda_x * w;
  const double sy = draw.lambda_y * h;

  MosaicSample sample;
  sample.width = w;
  sample.height = h;
  sample.split_x = sx;
  sample.split_y = sy;

  const std::array<BoundingBox, 4> windows{
      BoundingBox(0.0, 0.0, sx, sy), BoundingBox(sx, 0.0, w, sy), BoundingBox(0.0, sy, sx, h),
      BoundingBox(sx, sy, w, h)};

  for (std::size_t t = 0; t < 4; ++t) {
    const auto& input = inputs[t];
    TilePlacement tile;
    tile.source_image_id = std::string(input.image_id);
    tile.source_slot = t;
    tile.quadrant = static_cast<Quadrant>(t);
    tile.scale = draw.scales[t];
    tile.offset_x = windows[t].x_min();
    tile.offset_y = windows[t].y_min();
    tile.crop_window = windows[t];

    for (std::size_t i = 0; i < input.labels.size(); ++i) {
      const auto& label = input.labels[i];
      auto moved = transform_label(label.box, tile.scale, tile.offset_x, tile.offset_y,
                                   tile.crop_window, config.min_visible_area_ratio);
      if (!moved) {
        continue;
      }
      sample.labels.push_back(
          {moved->box, label.category, tile.source_image_id, i, t, moved->visible_fraction});
    }
    sample.tiles.push_back(std::move(tile));
  }
  return sample;
}

MosaicSample compose_mosaic(std::span<const MosaicInput, 4> inputs, const MosaicConfig& config,
                            CounterRng& rng) {
  return compose_mosaic(inputs, config, draw_mosaic(config, rng));
}

std::vector<MosaicSample> mosaic_batch(std::span<const MosaicInput> pool, std::size_t count,
                                       const MosaicConfig& config, std::uint64_t seed) {
  config.validate();
  if (pool.size() < 4) {
    throw ValidationError(fmt::format("mosaic needs a pool of at least 4 images, got {}", pool.size()));
  }
  std::vector<MosaicSample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    std::array<std::size_t, 4> picks{};
    for (std::size_t t = 0; t < 4; ++t) {
      std::size_t candidate = 0;
      do {
        candidate = static_cast<std::size_t>(rng.below(pool.size()));
      } while (std::find(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(t), candidate) !=
               picks.begin() + static_cast<std::ptrdiff_t>(t));
      picks[t] = candidate;
    }
    std::array<MosaicInput, 4> inputs{pool[picks[0]], pool[picks[1]], pool[picks[2]],
                                      pool[picks[3]]};
    auto sample = compose_mosaic(std::span<const MosaicInput, 4>(inputs), config, rng);
    for (std::size_t t = 0; t < 4; ++t) {
      sample.tiles[t].source_slot = picks[t];
    }
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace sfod
