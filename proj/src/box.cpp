#include "sfod/box.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sfod/errors.hpp"

namespace sfod {

BoundingBox::BoundingBox(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_max)) {
    throw ValidationError("bounding box has non-finite coordinates");
  }
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw ValidationError(fmt::format("degenerate bounding box ({}, {}, {}, {})", x_min,
                                      y_min, x_max, y_max));
  }
}

BoundingBox BoundingBox::scaled_translated(double scale, double dx, double dy) const {
  return {x_min_ * scale + dx, y_min_ * scale + dy, x_max_ * scale + dx,
          y_max_ * scale + dy};
}

bool BoundingBox::inside(double width, double height) const {
  return x_min_ >= 0.0 && y_min_ >= 0.0 && x_max_ <= width && y_max_ <= height;
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  return std::max(0.0, w) * std::max(0.0, h);
}

std::optional<BoundingBox> intersect(const BoundingBox& a, const BoundingBox& b) {
  const double x0 = std::max(a.x_min(), b.x_min());
  const double y0 = std::max(a.y_min(), b.y_min());
  const double x1 = std::min(a.x_max(), b.x_max());
  const double y1 = std::min(a.y_max(), b.y_max());
  if (!(x0 < x1) || !(y0 < y1)) {
    return std::nullopt;
  }
  return BoundingBox(x0, y0, x1, y1);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (a == b) {
    return 1.0;
  }
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) {
    return 0.0;
  }
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::optional<BoundingBox> clip_box(const BoundingBox& box, double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw ValidationError("clip_box needs a positive canvas");
  }
  return intersect(box, BoundingBox(0.0, 0.0, width, height));
}

}  // namespace sfod
