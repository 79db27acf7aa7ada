// Command-line front end: wavelet transforms, pyramids, the wavelet
// reconstruction penalty, scene richness, tiling and merging, metric
// evaluation, and the toy segmentation network.
//
// Image artifacts travel as PNG; float artifacts travel as .utsr raw
// tensors. Structured results go to stdout as a single JSON document;
// progress diagnostics go to stderr as JSON lines. Exit codes: 0 on
// success, 1 for usage errors, 2 for data errors.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uhrseg/core.hpp"
#include "uhrseg/loss.hpp"
#include "uhrseg/metrics.hpp"
#include "uhrseg/parallel.hpp"
#include "uhrseg/png_io.hpp"
#include "uhrseg/pyramid.hpp"
#include "uhrseg/richness.hpp"
#include "uhrseg/tensor_io.hpp"
#include "uhrseg/tiler.hpp"
#include "uhrseg/toynet.hpp"
#include "uhrseg/wavelet.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace uhrseg;

namespace {

void diag(const json& j) { std::cerr << j.dump() << "\n"; }

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// PNG or .utsr (rank 2 or CxHxW) to a channel list.
std::vector<Plane> load_planes(const std::string& path) {
  if (has_suffix(path, ".utsr")) {
    Tensor t = read_raw_tensor(path);
    if (t.rank() == 2) {
      Tensor wrapped({1, t.dims[0], t.dims[1]}, std::move(t.data));
      return channels_from_tensor(wrapped);
    }
    if (t.rank() != 3) throw IoError(path + ": expected a rank-2 or rank-3 tensor");
    return channels_from_tensor(t);
  }
  return read_image_png(path);
}

Plane pad_replicate(const Plane& p, int out_h, int out_w) {
  Plane out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const int sy = std::min(y, p.height - 1);
    for (int x = 0; x < out_w; ++x) out.at(y, x) = p.at(sy, std::min(x, p.width - 1));
  }
  return out;
}

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

std::string patch_name(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "patch_%05zu.%s", index, ext);
  return buf;
}

std::vector<std::string> list_pngs(const std::string& path) {
  std::vector<std::string> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".png")
        files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  if (files.empty()) throw IoError(path + ": no PNG files found");
  return files;
}

// ---------------------------------------------------------------- dwt

struct DwtOpts {
  std::string input, output;
  int levels = 1;
  int threads = 1;
};

void run_dwt(const DwtOpts& o) {
  const std::vector<Plane> planes = load_planes(o.input);
  const int H = planes[0].height, W = planes[0].width;
  const int mult = 1 << o.levels;
  const int hp = std::max(mult, round_up(H, mult)), wp = std::max(mult, round_up(W, mult));
  diag({{"event", "loaded"}, {"input", o.input}, {"channels", planes.size()},
        {"height", H}, {"width", W}});

  Tensor out({static_cast<std::uint32_t>(planes.size()), static_cast<std::uint32_t>(hp),
              static_cast<std::uint32_t>(wp)});
  parallel_for(planes.size(), o.threads, [&](std::size_t c) {
    const Plane padded = pad_replicate(planes[c], hp, wp);
    out.set_channel(static_cast<int>(c), mallat_pack(dwt_multilevel(padded, o.levels)));
  });
  write_raw_tensor(out, o.output);
  diag({{"event", "written"}, {"output", o.output}});
  emit({{"channels", planes.size()}, {"levels", o.levels}, {"orig_height", H},
        {"orig_width", W}, {"padded_height", hp}, {"padded_width", wp}});
}

// --------------------------------------------------------------- idwt

struct IdwtOpts {
  std::string input, output;
  int levels = 1;
  int orig_height = 0, orig_width = 0;  // 0 = no crop
  int threads = 1;
};

void run_idwt(const IdwtOpts& o) {
  Tensor t = read_raw_tensor(o.input);
  if (t.rank() != 3) throw IoError(o.input + ": expected a CxHxW tensor");
  std::vector<Plane> planes = channels_from_tensor(t);
  diag({{"event", "loaded"}, {"input", o.input}, {"channels", planes.size()}});

  std::vector<Plane> recon(planes.size());
  parallel_for(planes.size(), o.threads, [&](std::size_t c) {
    recon[c] = iwt_multilevel(mallat_unpack(planes[c], o.levels));
  });
  if (o.orig_height > 0 && o.orig_width > 0) {
    for (Plane& p : recon) p = crop_plane(p, TileWindow{0, 0, o.orig_width, o.orig_height});
  }
  if (has_suffix(o.output, ".utsr"))
    write_raw_tensor(tensor_from_channels(recon), o.output);
  else
    write_image_png(recon, o.output);
  diag({{"event", "written"}, {"output", o.output}});
  emit({{"channels", recon.size()}, {"levels", o.levels}, {"height", recon[0].height},
        {"width", recon[0].width}});
}

// ------------------------------------------------------------ pyramid

struct PyramidOpts {
  std::string input, prefix;
  int levels = 2;
  int threads = 1;
};

void run_pyramid(const PyramidOpts& o) {
  const std::vector<Plane> planes = load_planes(o.input);
  std::vector<BasicResidualStack<float>> stacks(planes.size());
  parallel_for(planes.size(), o.threads,
               [&](std::size_t c) { stacks[c] = laplacian_residuals(planes[c], o.levels); });

  json shapes = json::array();
  std::vector<std::string> files;
  for (int i = 0; i < o.levels; ++i) {
    std::vector<Plane> chans;
    for (auto& s : stacks) chans.push_back(s.residuals[i]);
    const std::string path = o.prefix + "_res" + std::to_string(i) + ".utsr";
    write_raw_tensor(tensor_from_channels(chans), path);
    files.push_back(path);
    shapes.push_back({{"height", chans[0].height}, {"width", chans[0].width}});
  }
  std::vector<Plane> base;
  for (auto& s : stacks) base.push_back(s.base);
  const std::string base_path = o.prefix + "_base.utsr";
  write_raw_tensor(tensor_from_channels(base), base_path);
  files.push_back(base_path);
  diag({{"event", "written"}, {"files", files.size()}});
  emit({{"levels", o.levels}, {"channels", planes.size()}, {"residuals", shapes},
        {"base", {{"height", base[0].height}, {"width", base[0].width}}}, {"files", files}});
}

// ---------------------------------------------------------------- wsl

struct WslOpts {
  std::string image, recon;
  LossWeights weights;
};

void run_wsl(const WslOpts& o) {
  const std::vector<Plane> a = load_planes(o.image);
  const std::vector<Plane> b = load_planes(o.recon);
  const WslParts parts = wsl_value(a, b, o.weights);
  emit({{"wsl", parts.value()}, {"low", parts.low}, {"high", parts.high},
        {"lambda1", o.weights.lambda1}, {"lambda2", o.weights.lambda2},
        {"levels", o.weights.depth}});
}

// ----------------------------------------------------------- richness

struct RichnessOpts {
  std::vector<std::string> inputs;
  int categories = 8;
  int region_size = 512;
  int regions = 64;
  int min_area = 32;
  double q = 2.0;
  std::uint64_t seed = 1;
};

void run_richness(const RichnessOpts& o) {
  std::vector<std::string> files;
  for (const std::string& in : o.inputs)
    for (std::string& f : list_pngs(in)) files.push_back(std::move(f));

  SeededRng rng(o.seed);
  std::vector<RegionStats> stats;
  for (const std::string& f : files) {
    const LabelMap m = read_label_png(f);
    for (const TileWindow& win : sample_regions(m, o.region_size, o.regions, rng))
      stats.push_back(region_stats(m, win, o.categories, o.min_area));
    diag({{"event", "sampled"}, {"file", f}, {"regions", o.regions}});
  }
  const RichnessReport rep = richness_score(stats, o.categories, o.q);
  json cats = json::array();
  for (const CategoryRichness& c : rep.categories)
    cats.push_back({{"id", c.category}, {"instances", c.instances},
                    {"pixel_fraction", c.pixel_fraction}});
  emit({{"score", rep.score}, {"q", rep.q}, {"regions", rep.regions},
        {"images", files.size()}, {"min_area", o.min_area}, {"categories", cats}});
}

// --------------------------------------------------------------- tile

struct TileOpts {
  std::string input, out_dir;
  int patch = 1000;
  int overlap = 120;
  bool labels = false;
};

void run_tile(const TileOpts& o) {
  fs::create_directories(o.out_dir);
  TilePlan plan;
  if (o.labels) {
    const LabelMap m = read_label_png(o.input);
    plan = plan_tiles(m.width, m.height, o.patch, o.overlap);
    for (std::size_t i = 0; i < plan.windows.size(); ++i)
      write_label_png(crop_labels(m, plan.windows[i]),
                      (fs::path(o.out_dir) / patch_name(i, "png")).string());
  } else {
    const std::vector<Plane> planes = read_image_png(o.input);
    plan = plan_tiles(planes[0].width, planes[0].height, o.patch, o.overlap);
    for (std::size_t i = 0; i < plan.windows.size(); ++i) {
      std::vector<Plane> crop;
      for (const Plane& p : planes) crop.push_back(crop_plane(p, plan.windows[i]));
      write_image_png(crop, (fs::path(o.out_dir) / patch_name(i, "png")).string());
    }
  }

  json windows = json::array();
  for (const TileWindow& w : plan.windows)
    windows.push_back({{"x0", w.x0}, {"y0", w.y0}, {"width", w.width}, {"height", w.height}});
  const json manifest = {{"image_width", plan.image_width}, {"image_height", plan.image_height},
                         {"patch", plan.patch},             {"overlap", plan.overlap},
                         {"labels", o.labels},              {"windows", windows}};
  const std::string mpath = (fs::path(o.out_dir) / "manifest.json").string();
  std::ofstream mf(mpath);
  if (!mf) throw IoError(mpath + ": cannot open for writing");
  mf << manifest.dump(2) << "\n";
  diag({{"event", "written"}, {"patches", plan.windows.size()}, {"manifest", mpath}});
  emit({{"windows", plan.windows.size()}, {"manifest", mpath}});
}

// -------------------------------------------------------------- merge

struct MergeOpts {
  std::string manifest, in_dir, output;
  int categories = 8;
  bool logits = false;
};

TilePlan plan_from_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError(path + ": cannot open");
  json j;
  f >> j;
  TilePlan plan;
  plan.image_width = j.at("image_width").get<int>();
  plan.image_height = j.at("image_height").get<int>();
  plan.patch = j.at("patch").get<int>();
  plan.overlap = j.at("overlap").get<int>();
  for (const json& w : j.at("windows"))
    plan.windows.push_back({w.at("x0").get<int>(), w.at("y0").get<int>(),
                            w.at("width").get<int>(), w.at("height").get<int>()});
  return plan;
}

void run_merge(const MergeOpts& o) {
  const TilePlan plan = plan_from_manifest(o.manifest);
  diag({{"event", "plan"}, {"windows", plan.windows.size()}});
  if (o.logits) {
    std::vector<Tensor> patches;
    for (std::size_t i = 0; i < plan.windows.size(); ++i)
      patches.push_back(read_raw_tensor((fs::path(o.in_dir) / patch_name(i, "utsr")).string()));
    const Tensor merged = merge_logits(plan, patches);
    if (has_suffix(o.output, ".png"))
      write_label_png(argmax_labels(merged), o.output);
    else
      write_raw_tensor(merged, o.output);
    emit({{"height", plan.image_height}, {"width", plan.image_width},
          {"channels", merged.channels()}, {"output", o.output}});
  } else {
    std::vector<LabelMap> patches;
    for (std::size_t i = 0; i < plan.windows.size(); ++i)
      patches.push_back(read_label_png((fs::path(o.in_dir) / patch_name(i, "png")).string()));
    write_label_png(merge_labels(plan, patches, o.categories), o.output);
    emit({{"height", plan.image_height}, {"width", plan.image_width}, {"output", o.output}});
  }
}

// --------------------------------------------------------------- eval

struct EvalOpts {
  std::string pred, truth;
  int categories = 8;
};

void run_eval(const EvalOpts& o) {
  const std::vector<std::string> pred_files = list_pngs(o.pred);
  const std::vector<std::string> truth_files = list_pngs(o.truth);
  if (pred_files.size() != truth_files.size())
    throw IoError("eval: prediction and truth counts differ (" +
                  std::to_string(pred_files.size()) + " vs " +
                  std::to_string(truth_files.size()) + ")");
  if (fs::is_directory(o.pred) || fs::is_directory(o.truth)) {
    for (std::size_t i = 0; i < pred_files.size(); ++i) {
      const std::string a = fs::path(pred_files[i]).filename().string();
      const std::string b = fs::path(truth_files[i]).filename().string();
      if (a != b) throw IoError("eval: file name mismatch: " + a + " vs " + b);
    }
  }

  ConfusionMatrix cm(o.categories);
  for (std::size_t i = 0; i < pred_files.size(); ++i)
    cm.accumulate(read_label_png(pred_files[i]), read_label_png(truth_files[i]));
  json cats = json::array();
  for (const CategoryScore& s : cm.category_scores())
    cats.push_back({{"id", s.category}, {"iou", s.iou}, {"f1", s.f1}, {"support", s.support}});
  emit({{"mean_iou", cm.mean_iou()}, {"macro_f1", cm.macro_f1()}, {"accuracy", cm.accuracy()},
        {"images", pred_files.size()}, {"categories", cats}});
}

// ---------------------------------------------------------- train-toy

struct TrainOpts {
  std::string output, manifest, history;
  int scenes = 1;
  int height = 64, width = 64;
  int categories = 4;
  std::uint64_t scene_seed = 11, init_seed = 11017;
  TrainConfig cfg;
};

json checkpoint_manifest(const TwoBranchNet& net) {
  json layers = json::array();
  std::size_t offset = 0;
  for (int li = 0; li < kLayerCount; ++li) {
    const auto& lay = net.layers[li];
    layers.push_back({{"name", layer_name(li)},
                      {"in_channels", lay.in_channels},
                      {"out_channels", lay.out_channels},
                      {"ksize", lay.ksize},
                      {"stride", lay.stride},
                      {"weight_offset", offset},
                      {"weight_count", lay.weights.size()},
                      {"bias_offset", offset + lay.weights.size()},
                      {"bias_count", lay.bias.size()}});
    offset += lay.parameter_count();
  }
  return {{"categories", net.categories}, {"parameters", offset}, {"layers", layers}};
}

void save_checkpoint(const TwoBranchNet& net, const std::string& blob_path,
                     const std::string& manifest_path) {
  const std::vector<float> flat = pack_parameters(net);
  write_raw_tensor(Tensor({static_cast<std::uint32_t>(flat.size())}, flat), blob_path);
  std::ofstream mf(manifest_path);
  if (!mf) throw IoError(manifest_path + ": cannot open for writing");
  mf << checkpoint_manifest(net).dump(2) << "\n";
}

TwoBranchNet load_checkpoint(const std::string& blob_path, int categories) {
  const Tensor t = read_raw_tensor(blob_path);
  if (t.rank() != 1) throw IoError(blob_path + ": checkpoint must be a rank-1 tensor");
  TwoBranchNet net(categories);
  unpack_parameters(net, t.data);
  return net;
}

void run_train(const TrainOpts& o) {
  TwoBranchNet net(o.categories);
  net.init_parameters(o.init_seed);
  SeededRng scene_rng(o.scene_seed);

  std::ofstream hist;
  if (!o.history.empty()) {
    hist.open(o.history);
    if (!hist) throw IoError(o.history + ": cannot open for writing");
  }

  std::size_t total_iters = 0;
  double final_acc = 0, final_total = 0;
  for (int s = 0; s < o.scenes; ++s) {
    const Scene scene = gen_scene<float>(o.height, o.width, o.categories, scene_rng);
    const std::vector<TrainRecord> records =
        train_on_scene(net, scene.image, scene.labels, o.cfg);
    total_iters += records.size();
    final_acc = records.back().accuracy;
    final_total = records.back().loss.total;
    if (hist.is_open()) {
      for (std::size_t i = 0; i < records.size(); ++i) {
        const TrainRecord& r = records[i];
        hist << json({{"scene", s}, {"iter", i}, {"total", r.loss.total}, {"seg", r.loss.seg},
                      {"aux", r.loss.aux}, {"wsl", r.loss.wsl}, {"accuracy", r.accuracy}})
                    .dump()
             << "\n";
      }
    }
    diag({{"event", "scene_done"}, {"scene", s}, {"iterations", records.size()},
          {"accuracy", final_acc}});
  }

  const std::string manifest =
      o.manifest.empty() ? fs::path(o.output).replace_extension(".json").string() : o.manifest;
  save_checkpoint(net, o.output, manifest);
  emit({{"scenes", o.scenes}, {"iterations_run", total_iters}, {"final_accuracy", final_acc},
        {"final_total", final_total}, {"parameters", net.parameter_count()},
        {"checkpoint", o.output}, {"manifest", manifest}});
}

// ---------------------------------------------------------- infer-toy

struct InferOpts {
  std::string checkpoint, input, output;
  int categories = 4;
};

void run_infer(const InferOpts& o) {
  const TwoBranchNet net = load_checkpoint(o.checkpoint, o.categories);
  std::vector<Plane> planes = read_image_png(o.input);
  if (planes.size() == 1) {
    planes.push_back(planes[0]);
    planes.push_back(planes[0]);
  }
  const int H = planes[0].height, W = planes[0].width;
  const int hp = std::max(32, round_up(H, 32)), wp = std::max(32, round_up(W, 32));
  for (Plane& p : planes) p = pad_replicate(p, hp, wp);
  const Tensor logits = infer_logits(net, planes);
  LabelMap labels = argmax_labels(logits);
  if (hp != H || wp != W) labels = crop_labels(labels, TileWindow{0, 0, W, H});
  write_label_png(labels, o.output);
  emit({{"height", H}, {"width", W}, {"categories", o.categories}, {"output", o.output}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavelet toolkit for ultra-high-resolution segmentation"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads for per-channel transforms")
      ->check(CLI::Range(1, 256));

  DwtOpts dwt_o;
  CLI::App* c_dwt = app.add_subcommand("dwt", "forward wavelet transform to a packed tensor");
  c_dwt->add_option("--input", dwt_o.input, "input image (.png or .utsr)")->required();
  c_dwt->add_option("--output", dwt_o.output, "output tensor (.utsr)")->required();
  c_dwt->add_option("--levels", dwt_o.levels, "transform levels")->check(CLI::Range(1, 8));

  IdwtOpts idwt_o;
  CLI::App* c_idwt = app.add_subcommand("idwt", "inverse wavelet transform of a packed tensor");
  c_idwt->add_option("--input", idwt_o.input, "input tensor (.utsr)")->required();
  c_idwt->add_option("--output", idwt_o.output, "output image (.png or .utsr)")->required();
  c_idwt->add_option("--levels", idwt_o.levels, "transform levels")->check(CLI::Range(1, 8));
  c_idwt->add_option("--orig-height", idwt_o.orig_height, "crop to this height");
  c_idwt->add_option("--orig-width", idwt_o.orig_width, "crop to this width");

  PyramidOpts pyr_o;
  CLI::App* c_pyr = app.add_subcommand("pyramid", "band-pass residual pyramid");
  c_pyr->add_option("--input", pyr_o.input, "input image (.png or .utsr)")->required();
  c_pyr->add_option("--output-prefix", pyr_o.prefix, "output path prefix")->required();
  c_pyr->add_option("--levels", pyr_o.levels, "residual levels")->check(CLI::Range(1, 8));

  WslOpts wsl_o;
  CLI::App* c_wsl = app.add_subcommand("wsl", "wavelet reconstruction penalty between two images");
  c_wsl->add_option("--image", wsl_o.image, "reference image (.png or .utsr)")->required();
  c_wsl->add_option("--recon", wsl_o.recon, "reconstruction (.png or .utsr)")->required();
  c_wsl->add_option("--lambda1", wsl_o.weights.lambda1, "low-frequency weight");
  c_wsl->add_option("--lambda2", wsl_o.weights.lambda2, "high-frequency weight");
  c_wsl->add_option("--levels", wsl_o.weights.depth, "packet levels")->check(CLI::Range(1, 8));

  RichnessOpts rich_o;
  CLI::App* c_rich = app.add_subcommand("richness", "scene context richness of label maps");
  c_rich->add_option("inputs", rich_o.inputs, "label PNG files or directories")->required();
  c_rich->add_option("--categories", rich_o.categories, "category count")->check(CLI::Range(1, 254));
  c_rich->add_option("--region-size", rich_o.region_size, "sampled region side length");
  c_rich->add_option("--regions", rich_o.regions, "regions per image");
  c_rich->add_option("--min-area", rich_o.min_area, "minimum instance pixel area");
  c_rich->add_option("--q", rich_o.q, "instance damping exponent");
  c_rich->add_option("--seed", rich_o.seed, "sampling seed");

  TileOpts tile_o;
  CLI::App* c_tile = app.add_subcommand("tile", "split an image into overlapping patches");
  c_tile->add_option("--input", tile_o.input, "input PNG")->required();
  c_tile->add_option("--output-dir", tile_o.out_dir, "patch directory")->required();
  c_tile->add_option("--patch", tile_o.patch, "patch side length");
  c_tile->add_option("--overlap", tile_o.overlap, "patch overlap");
  c_tile->add_flag("--labels", tile_o.labels, "treat the input as a label map");

  MergeOpts merge_o;
  CLI::App* c_merge = app.add_subcommand("merge", "merge patches back into one image");
  c_merge->add_option("--manifest", merge_o.manifest, "tile manifest JSON")->required();
  c_merge->add_option("--input-dir", merge_o.in_dir, "patch directory")->required();
  c_merge->add_option("--output", merge_o.output, "merged output")->required();
  c_merge->add_option("--categories", merge_o.categories, "category count for label voting");
  c_merge->add_flag("--logits", merge_o.logits, "patches are logit tensors (.utsr)");

  EvalOpts eval_o;
  CLI::App* c_eval = app.add_subcommand("eval", "confusion-matrix metrics for predictions");
  c_eval->add_option("--pred", eval_o.pred, "prediction label PNGs (file or directory)")->required();
  c_eval->add_option("--truth", eval_o.truth, "ground-truth label PNGs (file or directory)")->required();
  c_eval->add_option("--categories", eval_o.categories, "category count")->check(CLI::Range(1, 254));

  TrainOpts train_o;
  train_o.cfg.lr = 0.05;
  CLI::App* c_train = app.add_subcommand("train-toy", "train the toy network on procedural scenes");
  c_train->add_option("--output", train_o.output, "checkpoint tensor (.utsr)")->required();
  c_train->add_option("--manifest", train_o.manifest, "checkpoint manifest JSON path");
  c_train->add_option("--history", train_o.history, "per-iteration JSONL log path");
  c_train->add_option("--scenes", train_o.scenes, "scene count")->check(CLI::Range(1, 1000));
  c_train->add_option("--height", train_o.height, "scene height");
  c_train->add_option("--width", train_o.width, "scene width");
  c_train->add_option("--categories", train_o.categories, "category count")->check(CLI::Range(2, 254));
  c_train->add_option("--iterations", train_o.cfg.iterations, "iteration budget per scene");
  c_train->add_option("--lr", train_o.cfg.lr, "learning rate");
  c_train->add_option("--momentum", train_o.cfg.momentum, "momentum coefficient");
  c_train->add_option("--target-acc", train_o.cfg.target_accuracy,
                      "stop a scene early at this pixel accuracy");
  c_train->add_option("--scene-seed", train_o.scene_seed, "scene generator seed");
  c_train->add_option("--init-seed", train_o.init_seed, "parameter init seed");
  c_train->add_option("--lambda1", train_o.cfg.weights.lambda1, "low-frequency weight");
  c_train->add_option("--lambda2", train_o.cfg.weights.lambda2, "high-frequency weight");
  c_train->add_option("--lambda3", train_o.cfg.weights.lambda3, "auxiliary-head weight");
  c_train->add_option("--wsl-levels", train_o.cfg.weights.depth, "packet levels")
      ->check(CLI::Range(1, 8));

  InferOpts infer_o;
  CLI::App* c_infer = app.add_subcommand("infer-toy", "segment an image with a checkpoint");
  c_infer->add_option("--checkpoint", infer_o.checkpoint, "checkpoint tensor (.utsr)")->required();
  c_infer->add_option("--input", infer_o.input, "input PNG")->required();
  c_infer->add_option("--output", infer_o.output, "output label PNG")->required();
  c_infer->add_option("--categories", infer_o.categories, "category count")->check(CLI::Range(2, 254));

  for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    dwt_o.threads = threads;
    idwt_o.threads = threads;
    pyr_o.threads = threads;
    if (c_dwt->parsed()) run_dwt(dwt_o);
    else if (c_idwt->parsed()) run_idwt(idwt_o);
    else if (c_pyr->parsed()) run_pyramid(pyr_o);
    else if (c_wsl->parsed()) run_wsl(wsl_o);
    else if (c_rich->parsed()) run_richness(rich_o);
    else if (c_tile->parsed()) run_tile(tile_o);
    else if (c_merge->parsed()) run_merge(merge_o);
    else if (c_eval->parsed()) run_eval(eval_o);
    else if (c_train->parsed()) run_train(train_o);
    else if (c_infer->parsed()) run_infer(infer_o);
  } catch (const std::exception& e) {
    diag({{"event", "error"}, {"message", e.what()}});
    return 2;
  }
  return 0;
}
