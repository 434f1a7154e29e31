#include "sfod/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "sfod/errors.hpp"

namespace sfod {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "sfod-dataset";

json box_json(const BoundingBox& b) { return json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()}); }

/// Context for error messages: "image 'x': field 'y'".
struct Where {
  std::string image;
  std::string field;

  [[noreturn]] void fail(const std::string& what) const {
    if (image.empty()) {
      throw ValidationError(fmt::format("field '{}': {}", field, what));
    }
    throw ValidationError(fmt::format("image '{}': field '{}': {}", image, field, what));
  }
  Where at(const std::string& sub) const { return {image, field.empty() ? sub : field + "." + sub}; }
  Where index(std::size_t i) const { return {image, fmt::format("{}[{}]", field, i)}; }
};

const json& require(const json& obj, const char* key, const Where& where) {
  if (!obj.is_object()) {
    where.fail("expected an object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    where.at(key).fail("missing");
  }
  return *it;
}

double number(const json& v, const Where& where) {
  if (!v.is_number()) {
    where.fail("expected a number");
  }
  return v.get<double>();
}

int integer(const json& v, const Where& where) {
  if (!v.is_number_integer()) {
    where.fail("expected an integer");
  }
  return v.get<int>();
}

std::string text(const json& v, const Where& where) {
  if (!v.is_string()) {
    where.fail("expected a string");
  }
  return v.get<std::string>();
}

const json& array(const json& v, const Where& where) {
  if (!v.is_array()) {
    where.fail("expected an array");
  }
  return v;
}

BoundingBox parse_box(const json& v, const Where& where) {
  const auto& a = array(v, where);
  if (a.size() != 4) {
    where.fail("box needs 4 coordinates");
  }
  try {
    return BoundingBox(number(a[0], where), number(a[1], where), number(a[2], where),
                       number(a[3], where));
  } catch (const ValidationError& e) {
    where.fail(e.what());
  }
}

json parse_document(std::string_view content) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("malformed JSON: {}", e.what()));
  }
  const Where top{};
  if (!doc.is_object()) {
    top.fail("document must be an object");
  }
  if (text(require(doc, "format", top), top.at("format")) != kFormat) {
    top.at("format").fail(fmt::format("expected \"{}\"", kFormat));
  }
  const int version = integer(require(doc, "version", top), top.at("version"));
  if (version != kDatasetFormatVersion) {
    top.at("version").fail(fmt::format("unsupported version {}", version));
  }
  return doc;
}

json header(const std::vector<std::string>& categories) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kDatasetFormatVersion;
  doc["categories"] = categories;
  return doc;
}

std::vector<std::string> parse_categories(const json& doc) {
  const Where where{"", "categories"};
  std::vector<std::string> out;
  const auto& a = array(require(doc, "categories", {}), where);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(text(a[i], where.index(i)));
  }
  if (out.empty()) {
    where.fail("at least one category is required");
  }
  return out;
}

json image_header(const std::string& id, double w, double h) {
  json im;
  im["id"] = id;
  im["width"] = w;
  im["height"] = h;
  return im;
}

json ground_truth_json(const std::vector<LabeledBox>& truth) {
  json a = json::array();
  for (const auto& gt : truth) {
    a.push_back({{"box", box_json(gt.box)}, {"category", gt.category}});
  }
  return a;
}

json detections_json(const std::vector<Detection>& detections) {
  json a = json::array();
  for (const auto& d : detections) {
    const auto p = d.probs().values();
    a.push_back({{"box", box_json(d.box())}, {"probs", std::vector<double>(p.begin(), p.end())}});
  }
  return a;
}

ImageRecord parse_image(const json& v, std::size_t index) {
  const Where top{"", fmt::format("images[{}]", index)};
  ImageRecord image;
  image.id = text(require(v, "id", top), top.at("id"));
  const Where where{image.id, ""};
  image.width = number(require(v, "width", where), where.at("width"));
  image.height = number(require(v, "height", where), where.at("height"));
  if (auto it = v.find("ground_truth"); it != v.end()) {
    const Where w = where.at("ground_truth");
    std::vector<LabeledBox> truth;
    const auto& a = array(*it, w);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto wi = w.index(i);
      truth.push_back({parse_box(require(a[i], "box", wi), wi.at("box")),
                       integer(require(a[i], "category", wi), wi.at("category"))});
    }
    image.ground_truth = std::move(truth);
  }
  if (auto it = v.find("detections"); it != v.end()) {
    const Where w = where.at("detections");
    const auto& a = array(*it, w);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto wi = w.index(i);
      auto box = parse_box(require(a[i], "box", wi), wi.at("box"));
      const auto wp = wi.at("probs");
      const auto& pa = array(require(a[i], "probs", wi), wp);
      std::vector<double> probs;
      for (std::size_t j = 0; j < pa.size(); ++j) {
        probs.push_back(number(pa[j], wp.index(j)));
      }
      try {
        image.detections.emplace_back(box, ProbVector(std::move(probs)));
      } catch (const ValidationError& e) {
        wp.fail(e.what());
      }
    }
  }
  return image;
}

Dataset parse_dataset(const json& doc) {
  Dataset dataset;
  dataset.category_names = parse_categories(doc);
  const Where where{"", "images"};
  const auto& images = array(require(doc, "images", {}), where);
  for (std::size_t i = 0; i < images.size(); ++i) {
    dataset.images.push_back(parse_image(images[i], i));
  }
  validate_dataset(dataset);
  return dataset;
}

json image_json(const ImageRecord& image) {
  auto im = image_header(image.id, image.width, image.height);
  if (image.ground_truth) {
    im["ground_truth"] = ground_truth_json(*image.ground_truth);
  }
  if (!image.detections.empty()) {
    im["detections"] = detections_json(image.detections);
  }
  return im;
}

}  // namespace

std::string dataset_to_json(const Dataset& dataset) {
  auto doc = header(dataset.category_names);
  doc["images"] = json::array();
  for (const auto& image : dataset.images) {
    doc["images"].push_back(image_json(image));
  }
  return doc.dump(1) + "\n";
}

Dataset dataset_from_json(std::string_view content) { return parse_dataset(parse_document(content)); }

std::string world_to_json(const WorldDataset& world, const Dataset* detections) {
  if (detections && detections->images.size() != world.dataset.images.size()) {
    throw ValidationError("detections do not cover the world's images");
  }
  auto doc = header(world.dataset.category_names);
  doc["images"] = json::array();
  for (std::size_t i = 0; i < world.dataset.images.size(); ++i) {
    auto im = image_json(world.dataset.images[i]);
    if (detections && !detections->images[i].detections.empty()) {
      im["detections"] = detections_json(detections->images[i].detections);
    }
    json cands = json::array();
    for (const auto& c : world.candidates[i]) {
      cands.push_back({{"box", box_json(c.box)},
                       {"cue", c.cue},
                       {"hardness", c.hardness},
                       {"appearance", c.appearance},
                       {"gt_index", c.gt_index}});
    }
    im["candidates"] = std::move(cands);
    doc["images"].push_back(std::move(im));
  }
  return doc.dump(1) + "\n";
}

WorldDataset world_from_json(std::string_view content) {
  const auto doc = parse_document(content);
  WorldDataset world;
  world.dataset = parse_dataset(doc);
  const auto& images = doc.at("images");
  for (std::size_t i = 0; i < images.size(); ++i) {
    auto& image = world.dataset.images[i];
    image.detections.clear();
    const Where where{image.id, "candidates"};
    std::vector<Candidate> cands;
    const auto& a = array(require(images[i], "candidates", {image.id, ""}), where);
    for (std::size_t c = 0; c < a.size(); ++c) {
      const auto w = where.index(c);
      cands.push_back({parse_box(require(a[c], "box", w), w.at("box")),
                       integer(require(a[c], "cue", w), w.at("cue")),
                       number(require(a[c], "hardness", w), w.at("hardness")),
                       number(require(a[c], "appearance", w), w.at("appearance")),
                       integer(require(a[c], "gt_index", w), w.at("gt_index"))});
    }
    world.candidates.push_back(std::move(cands));
  }
  validate_world(world);
  return world;
}

std::string pseudo_labels_to_json(const PseudoLabelSet& labels) {
  auto doc = header(labels.category_names);
  doc["pseudo_label_threshold"] = labels.threshold;
  doc["images"] = json::array();
  for (const auto& image : labels.images) {
    auto im = image_header(image.image_id, image.width, image.height);
    json a = json::array();
    for (const auto& p : image.positives) {
      a.push_back({{"box", box_json(p.box)}, {"category", p.category}, {"confidence", p.confidence}});
    }
    im["pseudo_labels"] = std::move(a);
    doc["images"].push_back(std::move(im));
  }
  return doc.dump(1) + "\n";
}

PseudoLabelSet pseudo_labels_from_json(std::string_view content) {
  const auto doc = parse_document(content);
  PseudoLabelSet labels;
  labels.category_names = parse_categories(doc);
  const Where top{};
  labels.threshold = number(require(doc, "pseudo_label_threshold", top), top.at("pseudo_label_threshold"));
  const auto& images = array(require(doc, "images", top), top.at("images"));
  const auto k = static_cast<int>(labels.category_names.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Where it{"", fmt::format("images[{}]", i)};
    ImagePseudoLabels image;
    image.image_id = text(require(images[i], "id", it), it.at("id"));
    const Where where{image.image_id, ""};
    image.width = number(require(images[i], "width", where), where.at("width"));
    image.height = number(require(images[i], "height", where), where.at("height"));
    const auto w = where.at("pseudo_labels");
    const auto& a = array(require(images[i], "pseudo_labels", where), w);
    for (std::size_t p = 0; p < a.size(); ++p) {
      const auto wp = w.index(p);
      PseudoLabel label{parse_box(require(a[p], "box", wp), wp.at("box")),
                        integer(require(a[p], "category", wp), wp.at("category")),
                        number(require(a[p], "confidence", wp), wp.at("confidence"))};
      if (label.category < 0 || label.category >= k) {
        wp.at("category").fail("out of range");
      }
      if (!(label.confidence > labels.threshold)) {
        wp.at("confidence").fail("not above the set's threshold");
      }
      image.positives.push_back(label);
    }
    labels.images.push_back(std::move(image));
  }
  return labels;
}

std::string mosaic_samples_to_json(const std::vector<MosaicSample>& samples,
                                   const std::vector<std::string>& category_names) {
  auto doc = header(category_names);
  doc["images"] = json::array();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& sample = samples[s];
    auto im = image_header(fmt::format("mosaic{:05d}", s), sample.width, sample.height);
    json truth = json::array();
    for (const auto& label : sample.labels) {
      truth.push_back({{"box", box_json(label.box)},
                       {"category", label.category},
                       {"source",
                        {{"image", label.source_image_id},
                         {"index", label.source_index},
                         {"tile", label.tile}}},
                       {"visible_fraction", label.visible_fraction}});
    }
    im["ground_truth"] = std::move(truth);
    json tiles = json::array();
    for (const auto& tile : sample.tiles) {
      tiles.push_back({{"source_image", tile.source_image_id},
                       {"quadrant", to_string(tile.quadrant)},
                       {"scale", tile.scale},
                       {"offset", {tile.offset_x, tile.offset_y}},
                       {"crop_window", box_json(tile.crop_window)}});
    }
    im["mosaic"] = {{"split", {sample.split_x, sample.split_y}}, {"tiles", std::move(tiles)}};
    doc["images"].push_back(std::move(im));
  }
  return doc.dump(1) + "\n";
}

std::string sweep_to_json(const SweepResult& sweep) {
  json doc;
  json points = json::array();
  for (const auto& p : sweep.points) {
    json row{{"threshold", p.threshold}, {"positives", p.positives}};
    row["mean_self_entropy"] = p.mean_self_entropy ? json(*p.mean_self_entropy) : json(nullptr);
    row["map"] = p.map ? json(*p.map) : json(nullptr);
    points.push_back(std::move(row));
  }
  doc["points"] = std::move(points);
  doc["selection"] = {{"index", sweep.selection.index},
                      {"threshold", sweep.selection.threshold},
                      {"kind", to_string(sweep.selection.kind)}};
  return doc.dump(1) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Dataset load_dataset(const std::filesystem::path& path) {
  try {
    return dataset_from_json(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, dataset_to_json(dataset));
}

WorldDataset load_world(const std::filesystem::path& path) {
  try {
    return world_from_json(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw RuntimeFailure(fmt::format("cannot write '{}'", tmp.string()));
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw RuntimeFailure(fmt::format("write to '{}' failed", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw RuntimeFailure(fmt::format("cannot move output into '{}'", path.string()));
  }
}

}  // namespace sfod
