#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sfod/detection.hpp"
#include "sfod/mosaic.hpp"
#include "sfod/pseudo_label.hpp"
#include "sfod/sed.hpp"
#include "sfod/world.hpp"

namespace sfod {

inline constexpr int kDatasetFormatVersion = 1;

/// Dataset documents: {"format": "sfod-dataset", "version": 1, "categories": [...],
/// "images": [...]}. Each image has id, width, height and optionally
/// "ground_truth", "detections", "candidates" (world files), "pseudo_labels"
/// (with a top-level "pseudo_label_threshold") or "mosaic" (composed samples).
/// Keys are written sorted and numbers in shortest round-trip form, so
/// serialize(parse(text)) reproduces canonical text exactly.
std::string dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(std::string_view text);

std::string world_to_json(const WorldDataset& world, const Dataset* detections = nullptr);
WorldDataset world_from_json(std::string_view text);

std::string pseudo_labels_to_json(const PseudoLabelSet& labels);
PseudoLabelSet pseudo_labels_from_json(std::string_view text);

std::string mosaic_samples_to_json(const std::vector<MosaicSample>& samples,
                                   const std::vector<std::string>& category_names);

std::string sweep_to_json(const SweepResult& sweep);

std::string read_text_file(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
WorldDataset load_world(const std::filesystem::path& path);

/// Writes to a temporary sibling, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace sfod
