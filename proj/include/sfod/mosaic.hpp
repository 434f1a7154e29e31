#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfod/detection.hpp"
#include "sfod/random.hpp"

namespace sfod {

enum class Quadrant { TopLeft = 0, TopRight = 1, BottomLeft = 2, BottomRight = 3 };

const char* to_string(Quadrant q);

struct MosaicConfig {
  double canvas_width = 640.0;
  double canvas_height = 480.0;
  /// Cutting factor range; the split point is (lambda_x * W, lambda_y * H).
  double lambda_min = 0.3;
  double lambda_max = 0.7;
  /// Per-tile random scale range.
  double scale_min = 0.4;
  double scale_max = 1.0;
  /// A label survives only if this share of its scaled area stays visible.
  double min_visible_area_ratio = 0.25;

  void validate() const;
};

/// One labeled source image. Views only; the caller keeps the storage alive.
struct MosaicInput {
  std::string_view image_id;
  double width = 0.0;
  double height = 0.0;
  std::span<const LabeledBox> labels;
};

/// Random quantities of one composition.
struct MosaicDraw {
  double lambda_x = 0.5;
  double lambda_y = 0.5;
  std::array<double, 4> scales{1.0, 1.0, 1.0, 1.0};
};

struct TilePlacement {
  std::string source_image_id;
  /// Position of the source in the caller's input list or pool.
  std::size_t source_slot = 0;
  Quadrant quadrant = Quadrant::TopLeft;
  double scale = 1.0;
  double offset_x = 0.0;
  double offset_y = 0.0;
  /// The tile's share of the canvas; the four windows partition it.
  BoundingBox crop_window{0.0, 0.0, 1.0, 1.0};
};

struct MosaicLabel {
  BoundingBox box;
  int category = 0;
  std::string source_image_id;
  /// Index of the label within its source image's label list.
  std::size_t source_index = 0;
  /// Which of the sample's tiles it came from.
  std::size_t tile = 0;
  /// Visible area over scaled area, in (0,1].
  double visible_fraction = 1.0;
};

struct MosaicSample {
  double width = 0.0;
  double height = 0.0;
  double split_x = 0.0;
  double split_y = 0.0;
  std::vector<TilePlacement> tiles;
  std::vector<MosaicLabel> labels;
};

struct TransformedBox {
  BoundingBox box;
  double visible_fraction = 1.0;
};

/// Scale about the origin, translate by (offset_x, offset_y), clip to the
/// crop window. Dropped when the visible part is below
/// `min_visible_area_ratio` of the scaled box.
std::optional<TransformedBox> transform_label(const BoundingBox& box, double scale,
                                              double offset_x, double offset_y,
                                              const BoundingBox& crop_window,
                                              double min_visible_area_ratio);

MosaicDraw draw_mosaic(const MosaicConfig& config, CounterRng& rng);

/// Tiles A..D go to the top-left, top-right, bottom-left and bottom-right
/// quadrants around the split point. Each tile's scaled image is anchored at
/// its quadrant's top-left corner.
MosaicSample compose_mosaic(std::span<const MosaicInput, 4> inputs, const MosaicConfig& config,
                            const MosaicDraw& draw);

MosaicSample compose_mosaic(std::span<const MosaicInput, 4> inputs, const MosaicConfig& config,
                            CounterRng& rng);

/// Each sample uses four distinct pool images; samples are drawn
/// independently, so images repeat across samples.
std::vector<MosaicSample> mosaic_batch(std::span<const MosaicInput> pool, std::size_t count,
                                       const MosaicConfig& config, std::uint64_t seed);

}  // namespace sfod
