#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sfod/surrogate.hpp"
#include "sfod/toy.hpp"
#include "sfod/world.hpp"

namespace sfod {

struct SweepConfig {
  std::vector<double> grid;
  double plateau_epsilon = 1e-6;
  std::size_t threads = 1;
};

struct ToyRunConfig {
  ToyConfig toy;
  std::size_t trials = 5;
  std::vector<double> degrees;
};

/// Everything a subcommand may read. Defaults are the calibrated values.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  bool emit_svg = false;
  WorldConfig world;
  SourceModelConfig source;
  SgdConfig sgd;
  SweepConfig sweep;
  MosaicTrainingConfig mosaic;
  ToyRunConfig toy;
  /// Used by `analyze` and `eval`; sweeps score mAP at 0.5.
  double iou_threshold = 0.5;
  std::size_t histogram_bins = 10;
  std::size_t mosaic_count = 8;
  double mosaic_label_threshold = 0.5;

  RunConfig();
  /// Applies every module's preconditions.
  void validate() const;
  /// Flat `section.key=value` pairs in a fixed order, joined by "; ".
  std::string describe() const;
};

/// Flat INI document: `[section]` headers and `key = value` lines; lists are
/// comma separated. Unknown sections or keys are rejected. Values override
/// `base`.
RunConfig parse_config(std::string_view text, RunConfig base = RunConfig());
RunConfig load_config(const std::filesystem::path& path, RunConfig base = RunConfig());

}  // namespace sfod
