// Copyright 2026 The stampfeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: synthesize data, learn and rank a dictionary,
// train and evaluate the verifier, detect stamps, run the comparison bench.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stampfeat/dataset.hpp"
#include "stampfeat/detector.hpp"
#include "stampfeat/image_io.hpp"
#include "stampfeat/model_io.hpp"
#include "stampfeat/pipeline.hpp"
#include "stampfeat/report.hpp"
#include "stampfeat/synth.hpp"

namespace fs = std::filesystem;
using namespace stampfeat;

namespace {

struct Options {
  PipelineConfig cfg;
  std::string manifest;
  std::string model = "model.sfm";
  std::string out;
  std::string json;
  std::string split = "test";
  std::size_t n_pos = 400;
  std::size_t n_neg = 400;
  DetectParams det;
  bool all_rows = false;
  std::size_t atom_scale = 4;
};

struct Prepared {
  Manifest manifest;
  std::vector<LabeledImage> items;
  std::vector<GrayImage> inputs;
  std::vector<int> labels;
  Split split;
};

// Split and crop jitter depend only on the seed and the labels, so every
// command that recomputes them with the same seed sees the same partition.
Prepared prepare(const std::string& manifest_path, const PipelineConfig& cfg) {
  if (manifest_path.empty()) throw InvalidInput("--manifest is required");
  Prepared p;
  p.manifest = read_manifest(manifest_path);
  p.items = load_items(p.manifest);
  p.inputs = verification_inputs(p.items, cfg);
  for (const auto& it : p.items) p.labels.push_back(it.label);
  p.split = split(p.labels, cfg.train_fraction, derive_seed(cfg.seed, 5000011));
  return p;
}

std::vector<GrayImage> train_stamps(const Prepared& p) {
  std::vector<GrayImage> out;
  for (std::size_t i : p.split.train)
    if (p.labels[i] > 0) out.push_back(p.inputs[i]);
  if (out.empty()) throw InvalidInput("no stamp images in the training split");
  return out;
}

LabeledSet features_for(const Prepared& p, const std::vector<std::size_t>& idx, const FilterSet& filters) {
  LabeledSet out;
  for (std::size_t i : idx) out.push(extract(p.inputs[i], filters).values, p.labels[i] > 0 ? kStamp : kNonStamp);
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Model commands reuse the preprocessing recorded at learn time.
PipelineConfig with_model(PipelineConfig cfg, const ModelFile& mf) {
  cfg.resize_h = mf.resize_h;
  cfg.resize_w = mf.resize_w;
  cfg.patch = mf.patch;
  return cfg;
}

void check_provenance(const ModelFile& mf, const Prepared& p, const PipelineConfig& cfg) {
  if (mf.manifest_hash != p.manifest.hash)
    std::clog << "warning: manifest differs from the one the model was learned on\n";
  if (mf.seed != cfg.seed) std::clog << "warning: --seed differs from the model's seed; the split will not match\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

int cmd_synth(const Options& o) {
  if (o.out.empty()) throw InvalidInput("--out is required");
  DatasetTemplate tpl;
  const fs::path m = gen_dataset(o.n_pos, o.n_neg, tpl, o.cfg.seed, o.out);
  std::cout << m.string() << '\n';
  return 0;
}

int cmd_learn(const Options& o) {
  const PipelineConfig& cfg = o.cfg;
  const Prepared p = prepare(o.manifest, cfg);
  const LearnedDictionary ld = learn_dictionary(train_stamps(p), cfg);
  ModelFile mf;
  mf.resize_h = cfg.resize_h;
  mf.resize_w = cfg.resize_w;
  mf.patch = cfg.patch;
  mf.ranked = unranked(ld.dictionary, ld.whitening);
  mf.seed = cfg.seed;
  mf.manifest_hash = p.manifest.hash;
  save_model(o.model, mf);
  std::cout << "learned " << ld.dictionary.k() << " atoms of length " << ld.dictionary.atoms.cols() << " from "
            << ld.n_patches << " patches (" << ld.kmeans_iterations << " k-means iterations) -> " << o.model << '\n';
  return 0;
}

int cmd_rank(const Options& o) {
  ModelFile mf = load_model(o.model);
  const PipelineConfig cfg = with_model(o.cfg, mf);
  const Prepared p = prepare(o.manifest, cfg);
  check_provenance(mf, p, cfg);
  LearnedDictionary ld;
  ld.dictionary = mf.ranked.dict;
  ld.whitening = mf.ranked.whitening;
  const std::size_t old_v = mf.ranked.v;
  mf.ranked = rank_dictionary(ld, train_stamps(p), cfg);
  mf.is_ranked = true;
  mf.tau = cfg.tau;
  if (mf.svm && mf.ranked.v != old_v) {
    std::clog << "warning: v changed, dropping the trained classifier\n";
    mf.svm.reset();
  }
  save_model(o.model, mf);
  std::printf("rank atom score\n");
  for (std::size_t r = 0; r < mf.ranked.scores.rank.size(); ++r) {
    const std::size_t j = mf.ranked.scores.rank[r];
    std::printf("%4zu %4zu %.6f%s\n", r, j, mf.ranked.scores.scores[j], r < mf.ranked.v ? " *" : "");
  }
  std::printf("v = %zu of %zu (tau %.3f)\n", mf.ranked.v, mf.ranked.dict.k(), cfg.tau);
  return 0;
}

const std::vector<std::size_t>& pick_split(const Prepared& p, const std::string& which, std::vector<std::size_t>& all) {
  if (which == "train") return p.split.train;
  if (which == "test") return p.split.test;
  if (which == "all") {
    all = all_indices(p.inputs.size());
    return all;
  }
  throw InvalidInput("--split must be train, test or all");
}

int cmd_extract(const Options& o) {
  if (o.out.empty()) throw InvalidInput("--out is required");
  const ModelFile mf = load_model(o.model);
  const PipelineConfig cfg = with_model(o.cfg, mf);
  const Prepared p = prepare(o.manifest, cfg);
  check_provenance(mf, p, cfg);
  std::vector<std::size_t> all;
  const LabeledSet set = features_for(p, pick_split(p, o.split, all), composed_filters(mf.ranked));
  write_text(o.out, features_csv(set));
  std::cout << set.size() << " rows x " << set.dim() << " features -> " << o.out << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  ModelFile mf = load_model(o.model);
  const PipelineConfig cfg = with_model(o.cfg, mf);
  const Prepared p = prepare(o.manifest, cfg);
  check_provenance(mf, p, cfg);
  const LabeledSet train = features_for(p, p.split.train, composed_filters(mf.ranked));
  SvmTrace trace;
  mf.svm = train_svm(train, cfg.svm_c, cfg.svm_epochs, derive_seed(cfg.seed, 7000003), &trace);
  save_model(o.model, mf);
  const EvalReport r = evaluate(*mf.svm, train);
  std::printf("trained on %zu samples, %zu features; objective %.6f, %s after %d iterations; train acc %.2f%%\n",
              train.size(), train.dim(), trace.objective.back(), trace.converged ? "converged" : "stopped",
              trace.iterations, r.accuracy);
  return 0;
}

int cmd_eval(const Options& o) {
  const ModelFile mf = load_model(o.model);
  if (!mf.svm) throw InvalidInput("model has no classifier; run train first");
  const PipelineConfig cfg = with_model(o.cfg, mf);
  const Prepared p = prepare(o.manifest, cfg);
  check_provenance(mf, p, cfg);
  std::vector<std::size_t> all;
  const auto& idx = pick_split(p, o.split, all);
  const FilterSet filters = composed_filters(mf.ranked);
  const auto t0 = std::chrono::steady_clock::now();
  const LabeledSet test = features_for(p, idx, filters);
  const auto t1 = std::chrono::steady_clock::now();
  BenchRow row;
  row.method = mf.is_ranked ? "K-means (ranked)" : "K-means (all)";
  row.n_filters = filters.size();
  row.report = evaluate(*mf.svm, test);
  row.extract_time_s = std::chrono::duration<double>(t1 - t0).count();
  row.scoring_time_s = row.report.test_time_seconds;
  const std::vector<BenchRow> rows{row};
  std::cout << format_table(rows);
  nlohmann::json j = to_json(rows[0]);
  j["report"] = to_json(row.report);
  if (!o.json.empty()) write_text(o.json, j.dump(2) + "\n");
  else std::cout << j.dump() << '\n';
  return 0;
}

int cmd_detect(const Options& o) {
  if (o.manifest.empty()) throw InvalidInput("--manifest is required");
  const ModelFile mf = load_model(o.model);
  const Manifest m = read_manifest(o.manifest);
  const FilterSet filters = composed_filters(mf.ranked);
  if (!o.out.empty()) {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw IoError("cannot create " + o.out + ": " + ec.message());
  }
  std::ostringstream csv;
  csv << "path,x0,y0,x1,y1,peak\n";
  double iou_sum = 0.0;
  std::size_t n_gt = 0;
  for (const ManifestRow& r : m.rows) {
    if (!o.all_rows && r.label != 1) continue;
    const LabeledImage item = load_item(m, r);
    const DetectionResult d = detect(detection_input(item.image), filters, o.det);
    const bool found = d.found(o.det.peak_floor);
    char line[512];
    if (found)
      std::snprintf(line, sizeof line, "%s,%d,%d,%d,%d,%.9g\n", r.path.c_str(), d.box.x0, d.box.y0, d.box.x1,
                    d.box.y1, d.response_peak);
    else
      std::snprintf(line, sizeof line, "%s,,,,,%.9g\n", r.path.c_str(), d.response_peak);
    csv << line;
    if (item.box) {
      iou_sum += found ? iou(d.box, *item.box) : 0.0;
      ++n_gt;
    }
    if (!o.out.empty()) {
      RgbImage vis = to_rgb(item.image);
      if (item.box) draw_box(vis, *item.box, 0, 0, 255);
      if (found) draw_box(vis, d.box, 255, 0, 0);
      write_png((fs::path(o.out) / fs::path(r.path).filename()).string(), vis);
    }
  }
  if (!o.json.empty()) write_text(o.json, csv.str());
  else std::cout << csv.str();
  if (n_gt) std::clog << "mean IoU over " << n_gt << " annotated pages: " << iou_sum / n_gt << '\n';
  return 0;
}

int cmd_bench(const Options& o) {
  std::vector<LabeledImage> items;
  if (o.manifest.empty()) {
    items = to_items(gen_samples(o.n_pos, o.n_neg, DatasetTemplate{}, o.cfg.seed));
  } else {
    items = load_items(read_manifest(o.manifest));
  }
  const BenchResult res = run_bench(items, o.cfg);
  std::cout << format_table(res.rows);
  const std::string j = to_json(res.rows).dump(2);
  if (!o.json.empty()) write_text(o.json, j + "\n");
  else std::cout << j << '\n';
  return 0;
}

// Min-max stretched atom, upscaled by nearest neighbour.
GrayImage atom_image(const Eigen::RowVectorXd& atom, std::size_t side, std::size_t scale) {
  const double lo = atom.minCoeff(), hi = atom.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  GrayImage img(side * scale, side * scale);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      img.at(y, x) = (atom(static_cast<Eigen::Index>((y / scale) * side + x / scale)) - lo) / span;
  return img;
}

int cmd_dump_atoms(const Options& o) {
  if (o.out.empty()) throw InvalidInput("--out is required");
  const ModelFile mf = load_model(o.model);
  const auto& d = mf.ranked.dict;
  const std::size_t side = d.atom_side, s = std::max<std::size_t>(1, o.atom_scale), cell = side * s;
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw IoError("cannot create " + o.out + ": " + ec.message());
  for (std::size_t j = 0; j < d.k(); ++j) {
    char name[32];
    std::snprintf(name, sizeof name, "atom_%03zu.png", j);
    write_png((fs::path(o.out) / name).string(), atom_image(d.atoms.row(static_cast<Eigen::Index>(j)), side, s));
  }
  // Rank-ordered mosaic; selected atoms get a red frame.
  const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d.k()))));
  const std::size_t rows = (d.k() + cols - 1) / cols;
  const std::size_t gap = 2, pitch = cell + gap;
  GrayImage mosaic(rows * pitch + gap, cols * pitch + gap, 1.0);
  for (std::size_t r = 0; r < d.k(); ++r) {
    const GrayImage a = atom_image(d.atoms.row(static_cast<Eigen::Index>(mf.ranked.scores.rank[r])), side, s);
    const std::size_t oy = gap + (r / cols) * pitch, ox = gap + (r % cols) * pitch;
    for (std::size_t y = 0; y < cell; ++y)
      for (std::size_t x = 0; x < cell; ++x) mosaic.at(oy + y, ox + x) = a.at(y, x);
  }
  RgbImage vis = to_rgb(mosaic);
  if (mf.is_ranked)
    for (std::size_t r = 0; r < mf.ranked.v; ++r) {
      const int oy = static_cast<int>(gap + (r / cols) * pitch), ox = static_cast<int>(gap + (r % cols) * pitch);
      draw_box(vis, {ox - 1, oy - 1, ox + static_cast<int>(cell) + 1, oy + static_cast<int>(cell) + 1}, 255, 0, 0);
    }
  write_png((fs::path(o.out) / "ranked_mosaic.png").string(), vis);
  std::cout << d.k() << " atoms -> " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stamp verification and detection with learned shape features"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key=value file; flags on the command line win");

  Options o;
  PipelineConfig& c = o.cfg;
  app.add_option("--seed", c.seed, "base random seed")->capture_default_str();
  app.add_option("--manifest", o.manifest, "CSV manifest path,label,x0,y0,x1,y1");
  app.add_option("--model", o.model, "model file")->capture_default_str();
  app.add_option("--out", o.out, "output directory or file");
  app.add_option("--json", o.json, "write the machine-readable report here");
  app.add_option("--k", c.k, "dictionary size")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--patch", c.patch, "patch side m")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--resize-h", c.resize_h, "verification input height")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--resize-w", c.resize_w, "verification input width")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--epsilon", c.epsilon, "ZCA regularizer")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--patches-per-image", c.patches_per_image)->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--kmeans-iters", c.kmeans_iters)->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--tau", c.tau, "subset threshold in (0,1]")->capture_default_str()->check(CLI::Range(1e-9, 1.0));
  app.add_option("--ranking-images", c.ranking_images)->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--train-fraction", c.train_fraction)->capture_default_str()->check(CLI::Range(1e-9, 1.0 - 1e-9));
  app.add_option("--c", c.svm_c, "SVM cost")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--epochs", c.svm_epochs, "SVM passes")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--split", o.split, "train | test | all")->capture_default_str();
  app.add_option("--n-pos", o.n_pos)->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--n-neg", o.n_neg)->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--window-h", o.det.window_frac_h, "window height / page height")->capture_default_str()->check(CLI::Range(1e-9, 1.0));
  app.add_option("--window-w", o.det.window_frac_w, "window width / page width")->capture_default_str()->check(CLI::Range(1e-9, 1.0));
  app.add_option("--theta", o.det.theta, "box refinement threshold")->capture_default_str()->check(CLI::Range(1e-9, 1.0 - 1e-9));
  app.add_option("--peak-floor", o.det.peak_floor, "peaks at or below this mean no stamp")->capture_default_str();
  app.add_flag("--lower-half", o.det.lower_half_only, "search the lower half of the page only");
  app.add_flag("--all-rows", o.all_rows, "detect on non-stamp rows too");
  app.add_option("--atom-scale", o.atom_scale, "atom PNG upscaling")->capture_default_str()->check(CLI::PositiveNumber);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"synth", "write a seeded synthetic dataset (--out DIR)", cmd_synth},
      {"learn-dict", "learn the whitened K-means dictionary from training stamps", cmd_learn},
      {"rank", "rank atoms and choose the subset size v", cmd_rank},
      {"extract", "export pooled features as CSV (--out FILE)", cmd_extract},
      {"train", "train the linear SVM on the training split", cmd_train},
      {"eval", "evaluate the classifier on a split", cmd_eval},
      {"detect", "locate stamps on full pages", cmd_detect},
      {"bench", "four-way filter comparison", cmd_bench},
      {"dump-atoms", "write atom PNGs and the ranked mosaic (--out DIR)", cmd_dump_atoms},
  };
  for (const Command& cmd : commands) app.add_subcommand(cmd.name, cmd.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    for (const Command& cmd : commands)
      if (app.got_subcommand(cmd.name)) return cmd.run(o);
  } catch (const std::exception& e) {
    std::cerr << "stampfeat: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
