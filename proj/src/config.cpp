#include "sfod/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "sfod/errors.hpp"
#include "sfod/io.hpp"
#include "sfod/mosaic.hpp"
#include "sfod/sed.hpp"

namespace sfod {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& raw) {
  const auto s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError(fmt::format("config key '{}': '{}' is not a number", key, raw));
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& raw) {
  const auto s = trim(raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError(
        fmt::format("config key '{}': '{}' is not a non-negative integer", key, raw));
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const auto s = trim(raw);
  if (s == "true" || s == "1") {
    return true;
  }
  if (s == "false" || s == "0") {
    return false;
  }
  throw ValidationError(fmt::format("config key '{}': '{}' is not true/false", key, raw));
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(to_double(key, item));
  }
  if (out.empty()) {
    throw ValidationError(fmt::format("config key '{}': empty list", key));
  }
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::vector<std::string> cells;
  for (double x : v) {
    cells.push_back(fmt::format("{}", x));
  }
  return fmt::format("{}", fmt::join(cells, ","));
}

struct Binding {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
  /// Describes the computation, so it appears in the resolved config line.
  bool reproducible = true;
};

template <class T>
Binding real(std::string key, T& field) {
  return {key, [&field, key](const std::string& v) { field = to_double(key, v); },
          [&field] { return fmt::format("{}", field); }};
}

template <class T>
Binding count(std::string key, T& field) {
  return {key, [&field, key](const std::string& v) { field = static_cast<T>(to_unsigned(key, v)); },
          [&field] { return fmt::format("{}", field); }};
}

Binding list(std::string key, std::vector<double>& field) {
  return {key, [&field, key](const std::string& v) { field = to_list(key, v); },
          [&field] { return list_text(field); }};
}

std::vector<Binding> bindings(RunConfig& c) {
  auto& w = c.world;
  std::vector<Binding> b{
      count("run.seed", c.seed),
      {"run.output_dir", [&c](const std::string& v) { c.output_dir = trim(v); },
       [&c] { return c.output_dir.string(); }, false},
      {"run.svg", [&c](const std::string& v) { c.emit_svg = to_bool("run.svg", v); },
       [&c] { return std::string(c.emit_svg ? "true" : "false"); }, false},
      count("world.image_count", w.image_count),
      count("world.objects_min", w.objects_min),
      count("world.objects_max", w.objects_max),
      count("world.category_count", w.category_count),
      real("world.easy_share", w.easy_share),
      real("world.easy_alpha", w.easy_hardness.alpha),
      real("world.easy_beta", w.easy_hardness.beta),
      real("world.hard_alpha", w.hard_hardness.alpha),
      real("world.hard_beta", w.hard_hardness.beta),
      real("world.clutter_alpha", w.clutter_hardness.alpha),
      real("world.clutter_beta", w.clutter_hardness.beta),
      real("world.clutter_rate", w.clutter_rate),
      real("world.appearance_separation", w.appearance_separation),
      real("world.appearance_spread", w.appearance_spread),
      real("world.target_fn_share", w.target_fn_share),
      real("world.canvas_width", w.canvas_width),
      real("world.canvas_height", w.canvas_height),
      real("source.weight_visibility", c.source.weights[0]),
      real("source.weight_appearance", c.source.weights[1]),
      real("source.temperature", c.source.temperature),
      real("source.emission_floor", c.source.emission_floor),
      real("sgd.learning_rate", c.sgd.learning_rate),
      count("sgd.epochs", c.sgd.epochs),
      count("sgd.batch_size", c.sgd.batch_size),
      list("sweep.grid", c.sweep.grid),
      real("sweep.plateau_epsilon", c.sweep.plateau_epsilon),
      count("sweep.threads", c.sweep.threads),
      real("mosaic.lambda_min", c.mosaic.mosaic.lambda_min),
      real("mosaic.lambda_max", c.mosaic.mosaic.lambda_max),
      real("mosaic.scale_min", c.mosaic.mosaic.scale_min),
      real("mosaic.scale_max", c.mosaic.mosaic.scale_max),
      real("mosaic.min_visible_area_ratio", c.mosaic.mosaic.min_visible_area_ratio),
      real("mosaic.mix_ratio", c.mosaic.mix_ratio),
      count("mosaic.count", c.mosaic_count),
      real("mosaic.label_threshold", c.mosaic_label_threshold),
      count("toy.samples_per_class", c.toy.toy.samples_per_class),
      real("toy.separation", c.toy.toy.separation),
      count("toy.trials", c.toy.trials),
      list("toy.degrees", c.toy.degrees),
      real("toy.learning_rate", c.toy.toy.sgd.learning_rate),
      count("toy.epochs", c.toy.toy.sgd.epochs),
      count("toy.batch_size", c.toy.toy.sgd.batch_size),
      real("eval.iou_threshold", c.iou_threshold),
      count("analyze.bins", c.histogram_bins),
  };
  // Thread count changes scheduling only, never results.
  for (auto& entry : b) {
    if (entry.key == "sweep.threads") {
      entry.reproducible = false;
    }
  }
  return b;
}

}  // namespace

RunConfig::RunConfig() {
  sweep.grid = default_threshold_grid();
  toy.degrees = default_noise_degrees();
}

void RunConfig::validate() const {
  world.validate();
  sgd.validate();
  toy.toy.validate();
  mosaic.mosaic.validate();
  validate_threshold_grid(sweep.grid);
  if (!(sweep.plateau_epsilon >= 0.0)) {
    throw ValidationError("sweep.plateau_epsilon must be non-negative");
  }
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ValidationError("eval.iou_threshold must lie in (0,1)");
  }
  if (sweep.threads == 0) {
    throw ValidationError("sweep.threads must be positive");
  }
  if (!(mosaic.mix_ratio >= 0.0) || !std::isfinite(mosaic.mix_ratio)) {
    throw ValidationError("mosaic.mix_ratio must be non-negative");
  }
  if (!(mosaic_label_threshold >= 0.0 && mosaic_label_threshold <= 1.0)) {
    throw ValidationError("mosaic.label_threshold must lie in [0,1]");
  }
  if (!(source.temperature > 0.0) || !std::isfinite(source.weights[0]) ||
      !std::isfinite(source.weights[1])) {
    throw ValidationError("source model parameters invalid");
  }
  if (!(source.emission_floor >= 0.0 && source.emission_floor <= 1.0)) {
    throw ValidationError("source.emission_floor must lie in [0,1]");
  }
  if (toy.trials == 0) {
    throw ValidationError("toy.trials must be positive");
  }
  for (double d : toy.degrees) {
    if (!(d >= 0.0 && d <= 0.5)) {
      throw ValidationError(fmt::format("toy degree {} outside [0,0.5]", d));
    }
  }
  if (histogram_bins == 0) {
    throw ValidationError("analyze.bins must be positive");
  }
}

std::string RunConfig::describe() const {
  auto copy = *this;
  std::vector<std::string> parts;
  for (const auto& b : bindings(copy)) {
    if (b.reproducible) {
      parts.push_back(b.key + "=" + b.get());
    }
  }
  return fmt::format("{}", fmt::join(parts, "; "));
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(fmt::format("config: {}", e.what()));
  }
  auto table = bindings(base);
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ValidationError(fmt::format("config key '{}' must sit inside a [section]", section));
    }
    for (const auto& [key, value] : body) {
      const auto full = section + "." + key;
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const Binding& b) { return b.key == full; });
      if (it == table.end()) {
        throw ValidationError(fmt::format("unknown config key '{}'", full));
      }
      it->set(value.data());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  try {
    return parse_config(read_text_file(path), std::move(base));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace sfod
