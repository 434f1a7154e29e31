#pragma once

#include <optional>

namespace sfod {

/// Axis-aligned box in continuous pixel coordinates. Construction enforces
/// x_min < x_max, y_min < y_max and finite coordinates.
class BoundingBox {
 public:
  BoundingBox(double x_min, double y_min, double x_max, double y_max);

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }

  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double area() const { return width() * height(); }

  /// Scales all coordinates about the origin, then translates.
  BoundingBox scaled_translated(double scale, double dx, double dy) const;

  bool inside(double width, double height) const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_min_;
  double y_min_;
  double x_max_;
  double y_max_;
};

/// Overlap region, or nullopt when the intersection has zero area.
std::optional<BoundingBox> intersect(const BoundingBox& a, const BoundingBox& b);

double intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Box restricted to the canvas [0,width]x[0,height]; nullopt if nothing is left.
std::optional<BoundingBox> clip_box(const BoundingBox& box, double width, double height);

}  // namespace sfod
