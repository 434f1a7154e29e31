#include "sfod/cli.hpp"

#include <filesystem>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sfod/config.hpp"
#include "sfod/errors.hpp"
#include "sfod/io.hpp"
#include "sfod/metrics.hpp"
#include "sfod/mosaic.hpp"
#include "sfod/pseudo_label.hpp"
#include "sfod/report.hpp"
#include "sfod/sed.hpp"
#include "sfod/surrogate.hpp"
#include "sfod/toy.hpp"
#include "sfod/world.hpp"

namespace sfod {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t threads = 1;
  std::size_t trials = 0;
  std::string degrees;
  std::size_t images = 0;
  double fn_share = 0.0;
  std::string world_name = "world.json";
  std::string world_path;
  bool mosaic = false;
  std::string grid;
  std::string dataset_path;
  std::size_t bins = 0;
  std::size_t count = 0;
  double threshold = 0.0;
  bool use_ground_truth = false;
};

struct Options {
  CLI::Option* seed = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* svg = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* trials = nullptr;
  CLI::Option* degrees = nullptr;
  CLI::Option* images = nullptr;
  CLI::Option* fn_share = nullptr;
  std::vector<CLI::Option*> grids;
  CLI::Option* bins = nullptr;
  CLI::Option* count = nullptr;
  CLI::Option* threshold = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

RunConfig resolve(const Flags& f, const Options& o, bool svg_flag) {
  RunConfig cfg = f.config_path.empty() ? RunConfig() : load_config(f.config_path);
  if (given(o.seed)) {
    cfg.seed = f.seed;
  }
  if (given(o.out)) {
    cfg.output_dir = f.out_dir;
  }
  if (svg_flag) {
    cfg.emit_svg = true;
  }
  if (given(o.threads)) {
    cfg.sweep.threads = f.threads;
  }
  if (given(o.trials)) {
    cfg.toy.trials = f.trials;
  }
  if (given(o.degrees)) {
    cfg = parse_config("[toy]\ndegrees = " + f.degrees + "\n", cfg);
  }
  if (given(o.images)) {
    cfg.world.image_count = f.images;
  }
  if (given(o.fn_share)) {
    cfg.world.target_fn_share = f.fn_share;
  }
  for (const auto* g : o.grids) {
    if (given(g)) {
      cfg = parse_config("[sweep]\ngrid = " + f.grid + "\n", cfg);
    }
  }
  if (given(o.bins)) {
    cfg.histogram_bins = f.bins;
  }
  if (given(o.count)) {
    cfg.mosaic_count = f.count;
  }
  if (given(o.threshold)) {
    cfg.mosaic_label_threshold = f.threshold;
  }
  cfg.world.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

fs::path output_file(const RunConfig& cfg, const std::string& name) {
  const fs::path p(name);
  if (name.empty() || p.has_parent_path() || p.is_absolute() || name == "." || name == "..") {
    throw ValidationError(fmt::format("output name '{}' must be a plain file name", name));
  }
  return cfg.output_dir / p;
}

void emit(const RunConfig& cfg, const std::string& name, const std::string& content,
          std::ostream& out) {
  const auto path = output_file(cfg, name);
  write_file_atomic(path, content);
  out << "wrote " << path.string() << "\n";
}

struct Scene {
  std::shared_ptr<const WorldDataset> world;
  SurrogateModel source;
  Dataset target;
  std::string origin;
};

Scene make_scene(const RunConfig& cfg, const std::string& world_path) {
  Scene scene;
  if (world_path.empty()) {
    scene.world = std::make_shared<const WorldDataset>(generate_world(cfg.world));
    scene.origin = "generated";
  } else {
    scene.world = std::make_shared<const WorldDataset>(load_world(world_path));
    scene.origin = fs::path(world_path).filename().string();
  }
  scene.source = make_source_model(*scene.world, cfg.world.target_fn_share, cfg.source);
  scene.target = predict(scene.source, *scene.world);
  return scene;
}

SurrogateTrainer make_trainer(const RunConfig& cfg, const Scene& scene, bool mosaic) {
  std::optional<MosaicTrainingConfig> m;
  if (mosaic) {
    m = cfg.mosaic;
    const auto& images = scene.world->dataset.images;
    if (!images.empty()) {
      m->mosaic.canvas_width = images.front().width;
      m->mosaic.canvas_height = images.front().height;
    }
  }
  return SurrogateTrainer(scene.world, scene.source, cfg.sgd, m);
}

std::string optional_cell(const std::optional<double>& v) { return v ? cell(*v) : std::string(); }

CsvTable sweep_table(const std::string& config_line, const SweepResult& sweep) {
  CsvTable table(config_line, {"threshold_prob", "mean_self_entropy_nats", "map_ratio",
                               "positives_count", "selected"});
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    table.add_row({cell(p.threshold), optional_cell(p.mean_self_entropy), optional_cell(p.map),
                   std::to_string(p.positives), i == sweep.selection.index ? "1" : "0"});
  }
  return table;
}

void emit_sweep_plots(const RunConfig& cfg, const std::string& stem, const SweepResult& sweep,
                      std::ostream& out) {
  PlotSeries entropy{"mean self-entropy", {}, {}};
  PlotSeries map{"mAP", {}, {}};
  for (const auto& p : sweep.points) {
    entropy.x.push_back(p.threshold);
    entropy.y.push_back(p.mean_self_entropy.value_or(std::nan("")));
    map.x.push_back(p.threshold);
    map.y.push_back(p.map.value_or(std::nan("")));
  }
  const int mark = static_cast<int>(sweep.selection.index);
  emit(cfg, stem + "_entropy.svg",
       render_svg({"Mean self-entropy vs. threshold", "threshold h", "entropy (nats)", {entropy}, mark}),
       out);
  emit(cfg, stem + "_map.svg",
       render_svg({"mAP vs. threshold", "threshold h", "mAP", {map}, mark}), out);
}

int cmd_toy(const RunConfig& cfg, std::ostream& out) {
  const auto curve = toy_noise_experiment(cfg.toy.degrees, cfg.toy.trials, cfg.seed, cfg.toy.toy);
  CsvTable table(cfg.describe(), {"noise_degree_ratio", "entropy_minus_nats", "entropy_plus_nats",
                                  "mean_self_entropy_nats"});
  PlotSeries minus{"positives to negatives", {}, {}};
  PlotSeries plus{"negatives to positives", {}, {}};
  PlotSeries mean{"mean", {}, {}};
  for (const auto& p : curve) {
    table.add_row({cell(p.noise_degree), cell(p.entropy_minus), cell(p.entropy_plus), cell(p.entropy)});
    minus.x.push_back(p.noise_degree);
    minus.y.push_back(p.entropy_minus);
    plus.x.push_back(p.noise_degree);
    plus.y.push_back(p.entropy_plus);
    mean.x.push_back(p.noise_degree);
    mean.y.push_back(p.entropy);
  }
  emit(cfg, "toy.csv", table.str(), out);
  if (cfg.emit_svg) {
    emit(cfg, "toy.svg",
         render_svg({"Label noise vs. mean self-entropy", "noise degree", "entropy (nats)",
                     {mean, minus, plus}, -1}),
         out);
  }
  return kExitOk;
}

int cmd_world_gen(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const auto scene = make_scene(cfg, "");
  std::size_t candidates = 0;
  for (const auto& c : scene.world->candidates) {
    candidates += c.size();
  }
  out << fmt::format("world: {} images, {} objects, {} candidates, source FN share {:.4f}\n",
                     scene.world->dataset.images.size(), scene.world->object_count(), candidates,
                     false_negative_share(scene.source, *scene.world));
  emit(cfg, f.world_name, world_to_json(*scene.world, &scene.target), out);
  return kExitOk;
}

std::string run_line(const RunConfig& cfg, const Scene& scene, bool mosaic) {
  return cfg.describe() + fmt::format("; run.world={}; run.mosaic={}", scene.origin, mosaic);
}

int cmd_sweep(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const auto scene = make_scene(cfg, f.world_path);
  const auto trainer = make_trainer(cfg, scene, f.mosaic);
  SweepResult sweep;
  sweep.points = run_sweep(scene.target, trainer, cfg.sweep.grid, cfg.seed,
                           {cfg.sweep.plateau_epsilon, cfg.sweep.threads});
  sweep.selection = select_threshold(sweep.points, cfg.sweep.plateau_epsilon);
  out << fmt::format("selected h={} ({})\n", sweep.selection.threshold,
                     to_string(sweep.selection.kind));
  emit(cfg, "sweep.csv", sweep_table(run_line(cfg, scene, f.mosaic), sweep).str(), out);
  emit(cfg, "sweep.json", sweep_to_json(sweep), out);
  if (cfg.emit_svg) {
    emit_sweep_plots(cfg, "sweep", sweep, out);
  }
  return kExitOk;
}

int cmd_adapt(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const auto scene = make_scene(cfg, f.world_path);
  const auto trainer = make_trainer(cfg, scene, f.mosaic);
  const auto result = adapt(scene.target, trainer, cfg.sweep.grid, cfg.seed,
                            {cfg.sweep.plateau_epsilon, cfg.sweep.threads});
  const double source_map = evaluate_map(scene.target).map;
  const auto& sel = result.sweep.selection;
  const auto line = run_line(cfg, scene, f.mosaic);
  CsvTable table(line, {"mode", "selected_threshold_prob", "selection_kind", "source_map_ratio",
                        "final_map_ratio", "final_mean_self_entropy_nats", "positives_count"});
  table.add_row({f.mosaic ? "sfod-mosaic" : "sfod", cell(sel.threshold), to_string(sel.kind),
                 cell(source_map), optional_cell(result.final_map),
                 optional_cell(result.final_entropy),
                 std::to_string(result.sweep.points[sel.index].positives)});
  out << fmt::format("source mAP {:.4f} -> adapted mAP {:.4f} at h={} ({})\n", source_map,
                     result.final_map.value_or(0.0), sel.threshold, to_string(sel.kind));
  emit(cfg, "adapt.csv", table.str(), out);
  emit(cfg, "adapt_sweep.csv", sweep_table(line, result.sweep).str(), out);
  emit(cfg, "adapted.json", dataset_to_json(trainer.predict(result.model, scene.target)), out);
  if (cfg.emit_svg) {
    emit_sweep_plots(cfg, "adapt_sweep", result.sweep, out);
  }
  return kExitOk;
}

int cmd_analyze(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const auto dataset = load_dataset(f.dataset_path);
  const auto edges = uniform_bin_edges(cfg.histogram_bins);
  const auto hist = confidence_histogram(dataset, edges, cfg.iou_threshold);
  const auto line = cfg.describe() + fmt::format("; run.dataset={}", fs::path(f.dataset_path).filename().string());
  CsvTable table(line, {"bucket", "low_prob", "high_prob", "tp_ratio", "fp_ratio", "fn_ratio"});
  PlotSeries tp{"true positives", {}, {}};
  PlotSeries fp{"false positives", {}, {}};
  double tp_total = 0.0;
  for (std::size_t i = 0; i < hist.tp_ratio.size(); ++i) {
    const double lo = hist.bin_edges[i];
    const double hi = hist.bin_edges[i + 1];
    table.add_row({fmt::format("{}-{}", lo, hi), cell(lo), cell(hi), cell(hist.tp_ratio[i]),
                   cell(hist.fp_ratio[i]), "0"});
    tp.x.push_back(0.5 * (lo + hi));
    tp.y.push_back(hist.tp_ratio[i]);
    fp.x.push_back(0.5 * (lo + hi));
    fp.y.push_back(hist.fp_ratio[i]);
    tp_total += hist.tp_ratio[i];
  }
  table.add_row({"missed", "", "", "0", "0", cell(hist.fn_ratio)});
  out << fmt::format("ground truth {}: matched {:.4f}, missed {:.4f}\n", hist.gt_total, tp_total,
                     hist.fn_ratio);
  emit(cfg, "histogram.csv", table.str(), out);

  CsvTable entropy(line, {"image_id", "mean_self_entropy_nats"});
  const bool any = std::any_of(dataset.images.begin(), dataset.images.end(),
                               [](const ImageRecord& im) { return !im.detections.empty(); });
  if (any) {
    const auto report = mean_self_entropy(dataset);
    for (const auto& im : report.per_image) {
      entropy.add_row({im.image_id, cell(im.entropy)});
    }
    entropy.add_row({"(mean)", cell(report.mean_self_entropy)});
  }
  emit(cfg, "entropy.csv", entropy.str(), out);
  if (cfg.emit_svg) {
    emit(cfg, "histogram.svg",
         render_svg({"Detections by confidence (share of ground truth)", "confidence",
                     "share of ground truth", {tp, fp}, -1}),
         out);
  }
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const auto dataset = load_dataset(f.dataset_path);
  const auto report = evaluate_map(dataset, cfg.iou_threshold);
  const auto line = cfg.describe() + fmt::format("; run.dataset={}", fs::path(f.dataset_path).filename().string());
  CsvTable table(line, {"category", "ap_ratio", "gt_count"});
  std::size_t total = 0;
  for (std::size_t c = 0; c < report.per_category_ap.size(); ++c) {
    table.add_row({dataset.category_names[c], optional_cell(report.per_category_ap[c]),
                   std::to_string(report.gt_counts[c])});
    total += report.gt_counts[c];
  }
  table.add_row({"(mAP)", cell(report.map), std::to_string(total)});
  out << fmt::format("mAP@{} = {:.4f}\n", cfg.iou_threshold, report.map);
  emit(cfg, "eval.csv", table.str(), out);
  return kExitOk;
}

int cmd_mosaic(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const auto dataset = load_dataset(f.dataset_path);
  if (dataset.images.empty()) {
    throw ValidationError("mosaic needs a non-empty dataset");
  }
  std::vector<std::vector<LabeledBox>> labels(dataset.images.size());
  if (f.use_ground_truth) {
    for (std::size_t i = 0; i < dataset.images.size(); ++i) {
      if (!dataset.images[i].ground_truth) {
        throw ValidationError(fmt::format("image '{}': no ground truth", dataset.images[i].id));
      }
      labels[i] = *dataset.images[i].ground_truth;
    }
  } else {
    const auto pseudo = generate_pseudo_labels(dataset, cfg.mosaic_label_threshold);
    for (std::size_t i = 0; i < pseudo.images.size(); ++i) {
      for (const auto& p : pseudo.images[i].positives) {
        labels[i].push_back({p.box, p.category});
      }
    }
  }
  std::vector<MosaicInput> pool;
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const auto& im = dataset.images[i];
    pool.push_back({im.id, im.width, im.height, labels[i]});
  }
  auto mcfg = cfg.mosaic.mosaic;
  mcfg.canvas_width = dataset.images.front().width;
  mcfg.canvas_height = dataset.images.front().height;
  const auto samples = mosaic_batch(pool, cfg.mosaic_count, mcfg, cfg.seed);

  const auto line = cfg.describe() +
                    fmt::format("; run.dataset={}; run.labels={}",
                                fs::path(f.dataset_path).filename().string(),
                                f.use_ground_truth ? "ground-truth" : "pseudo");
  CsvTable table(line, {"sample", "category", "x_min_px", "y_min_px", "x_max_px", "y_max_px",
                        "source_image", "source_index", "tile", "visible_fraction_ratio"});
  std::size_t total = 0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (const auto& l : samples[s].labels) {
      table.add_row({std::to_string(s), dataset.category_names.at(static_cast<std::size_t>(l.category)),
                     cell(l.box.x_min()), cell(l.box.y_min()), cell(l.box.x_max()),
                     cell(l.box.y_max()), l.source_image_id, std::to_string(l.source_index),
                     std::to_string(l.tile), cell(l.visible_fraction)});
      ++total;
    }
  }
  out << fmt::format("{} mosaic samples, {} labels\n", samples.size(), total);
  emit(cfg, "mosaic.json", mosaic_samples_to_json(samples, dataset.category_names), out);
  emit(cfg, "mosaic.csv", table.str(), out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Source-free detector adaptation with entropy-guided threshold search", "sfod"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  Options o;
  bool svg = false;
  app.add_option("-c,--config", f.config_path, "INI config file")->check(CLI::ExistingFile);
  o.seed = app.add_option("--seed", f.seed, "Global seed");
  o.out = app.add_option("-o,--out", f.out_dir, "Output directory");
  o.svg = app.add_flag("--svg", svg, "Also write SVG plots");
  o.threads = app.add_option("--threads", f.threads, "Sweep points trained concurrently");

  auto* toy = app.add_subcommand("toy", "Label-noise vs. entropy experiment on a two-class toy set");
  o.trials = toy->add_option("--trials", f.trials, "Trials averaged per degree");
  o.degrees = toy->add_option("--degrees", f.degrees, "Comma-separated noise degrees in [0,0.5]");

  auto* world = app.add_subcommand("world", "Synthetic world tools");
  world->require_subcommand(1);
  auto* gen = world->add_subcommand("gen", "Generate a world with source-model detections");
  o.images = gen->add_option("--images", f.images, "Image count");
  o.fn_share = gen->add_option("--fn-share", f.fn_share, "Source false-negative share");
  gen->add_option("--name", f.world_name, "Output file name inside the output directory");

  auto* sweep = app.add_subcommand("sweep", "Threshold sweep with entropy-based selection");
  sweep->add_option("--world", f.world_path, "World file (default: generate)")->check(CLI::ExistingFile);
  sweep->add_flag("--mosaic", f.mosaic, "Train with mosaic samples");
  o.grids.push_back(sweep->add_option("--grid", f.grid, "Comma-separated descending thresholds"));

  auto* adapt_cmd = app.add_subcommand("adapt", "Sweep, select, retrain at the selected threshold");
  adapt_cmd->add_option("--world", f.world_path, "World file (default: generate)")->check(CLI::ExistingFile);
  adapt_cmd->add_flag("--mosaic", f.mosaic, "Train with mosaic samples");
  o.grids.push_back(adapt_cmd->add_option("--grid", f.grid, "Comma-separated descending thresholds"));

  auto* analyze = app.add_subcommand("analyze", "Confidence histogram and entropy report");
  analyze->add_option("--dataset", f.dataset_path, "Dataset JSON with ground truth")
      ->required()
      ->check(CLI::ExistingFile);
  o.bins = analyze->add_option("--bins", f.bins, "Number of confidence bins");

  auto* mosaic = app.add_subcommand("mosaic", "Compose mosaic samples from a labeled dataset");
  mosaic->add_option("--dataset", f.dataset_path, "Dataset JSON")->required()->check(CLI::ExistingFile);
  o.count = mosaic->add_option("--count", f.count, "Number of samples");
  o.threshold = mosaic->add_option("--threshold", f.threshold, "Pseudo-label threshold");
  mosaic->add_flag("--ground-truth", f.use_ground_truth, "Use ground truth instead of pseudo labels");

  auto* eval = app.add_subcommand("eval", "mAP of saved detections against ground truth");
  eval->add_option("--dataset", f.dataset_path, "Dataset JSON with detections and ground truth")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      std::ostringstream help;
      app.exit(e, help, err);
      out << help.str();
      return kExitOk;
    }
    err << "sfod: error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    const auto cfg = resolve(f, o, svg);
    if (toy->parsed()) {
      return cmd_toy(cfg, out);
    }
    if (gen->parsed()) {
      return cmd_world_gen(cfg, f, out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(cfg, f, out);
    }
    if (adapt_cmd->parsed()) {
      return cmd_adapt(cfg, f, out);
    }
    if (analyze->parsed()) {
      return cmd_analyze(cfg, f, out);
    }
    if (mosaic->parsed()) {
      return cmd_mosaic(cfg, f, out);
    }
    if (eval->parsed()) {
      return cmd_eval(cfg, f, out);
    }
    err << "sfod: error: no command\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "sfod: error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "sfod: error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace sfod
