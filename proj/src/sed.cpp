#include "sfod/sed.hpp"

#include <cmath>

#include <fmt/format.h>

namespace sfod {

const char* to_string(SelectionKind kind) {
  switch (kind) {
    case SelectionKind::FirstLocalMinimum:
      return "first-local-minimum";
    case SelectionKind::GlobalMinimumFallback:
      return "global-min-fallback";
  }
  return "unknown";
}

SweepFailure::SweepFailure(double threshold, const std::string& what)
    : RuntimeFailure(fmt::format("sweep failed at h={}: {}", threshold, what)),
      threshold_(threshold) {}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int step = 9; step >= 1; --step) {
    grid.push_back(step / 10.0);
  }
  return grid;
}

void validate_threshold_grid(std::span<const double> grid) {
  if (grid.empty()) {
    throw ValidationError("threshold grid is empty");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) {
      throw ValidationError(fmt::format("threshold {} outside [0,1]", grid[i]));
    }
    if (i > 0 && !(grid[i] < grid[i - 1])) {
      throw ValidationError(fmt::format("threshold grid not strictly descending at index {}", i));
    }
  }
}

Selection select_threshold(std::span<const SweepPoint> points, double plateau_epsilon) {
  if (points.empty()) {
    throw ValidationError("cannot select a threshold from an empty sweep");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].threshold < points[i - 1].threshold)) {
      throw ValidationError("sweep points must be ordered by descending threshold");
    }
  }
  for (std::size_t i = 1; i + 1 < points.size(); ++i) {
    const auto& prev = points[i - 1].mean_self_entropy;
    const auto& here = points[i].mean_self_entropy;
    const auto& next = points[i + 1].mean_self_entropy;
    if (!prev || !here || !next) {
      continue;
    }
    if (*here < *prev - plateau_epsilon && *here <= *next + plateau_epsilon) {
      return {i, points[i].threshold, SelectionKind::FirstLocalMinimum};
    }
  }
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& h = points[i].mean_self_entropy;
    if (h && (!best || *h < *points[*best].mean_self_entropy)) {
      best = i;
    }
  }
  if (!best) {
    throw RuntimeFailure("no sweep point produced any detection; entropy is undefined everywhere");
  }
  return {*best, points[*best].threshold, SelectionKind::GlobalMinimumFallback};
}

}  // namespace sfod
