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

#pragma once

#include <chrono>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stampfeat/baselines.hpp"
#include "stampfeat/classifier.hpp"
#include "stampfeat/dictionary.hpp"
#include "stampfeat/features.hpp"
#include "stampfeat/imaging.hpp"
#include "stampfeat/whitening.hpp"

namespace stampfeat {

/// End-to-end settings shared by the CLI, the benchmark and the tests.
struct PipelineConfig {
  std::size_t resize_h = 64;
  std::size_t resize_w = 96;
  std::size_t patch = 16;
  std::size_t k = 64;
  double epsilon = kDefaultZcaEpsilon;
  double tau = kDefaultTau;
  std::size_t patches_per_image = 40;
  int kmeans_iters = 100;
  std::size_t ranking_images = 1;
  double train_fraction = 0.7;
  double svm_c = kDefaultSvmC;
  int svm_epochs = kDefaultSvmEpochs;
  // Annotation jitter for stamp crops, as a fraction of box size per side.
  double crop_margin_min = -0.05;
  double crop_margin_max = 0.15;
  std::uint64_t seed = 1;
};

/// One labeled item: a page with a stamp box, or a non-stamp crop.
struct LabeledImage {
  GrayImage image;
  std::optional<BoundingBox> box;
  int label = 0;  // 1 stamp, 0 non-stamp
};

/// Verification input: stamp pages are cropped around the box with a seeded
/// margin jitter (imitating hand-drawn boxes), then every image is resized
/// and min-max normalized.
inline GrayImage verification_input(const LabeledImage& item, const PipelineConfig& cfg, std::uint64_t item_seed) {
  GrayImage img = item.image;
  if (item.box) {
    Rng rng(item_seed);
    std::uniform_real_distribution<double> margin(cfg.crop_margin_min, cfg.crop_margin_max);
    const BoundingBox& b = *item.box;
    const double bw = b.width(), bh = b.height();
    const BoundingBox jittered{static_cast<int>(std::lround(b.x0 - margin(rng) * bw)),
                               static_cast<int>(std::lround(b.y0 - margin(rng) * bh)),
                               static_cast<int>(std::lround(b.x1 + margin(rng) * bw)),
                               static_cast<int>(std::lround(b.y1 + margin(rng) * bh))};
    img = crop(img, jittered);
  }
  return normalize(resize(img, cfg.resize_h, cfg.resize_w));
}

inline std::vector<GrayImage> verification_inputs(std::span<const LabeledImage> items, const PipelineConfig& cfg) {
  std::vector<GrayImage> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out.push_back(verification_input(items[i], cfg, derive_seed(cfg.seed, 1000003 + i)));
  return out;
}

/// Detection runs on the full page at native resolution, min-max normalized.
/// A constant page is passed through: stretching would turn a blank white
/// page into a black one.
inline GrayImage detection_input(const GrayImage& page) {
  const auto [lo, hi] = std::minmax_element(page.data.begin(), page.data.end());
  if (!page.empty() && *lo == *hi) return page;
  return normalize(page);
}

struct LearnedDictionary {
  WhiteningTransform whitening;
  Dictionary dictionary;
  std::size_t n_patches = 0;
  int kmeans_iterations = 0;
};

/// Sample patches from stamp images, fit ZCA, whiten, cluster.
inline LearnedDictionary learn_dictionary(std::span<const GrayImage> stamp_images, const PipelineConfig& cfg) {
  require(!stamp_images.empty(), "learn_dictionary: no stamp images");
  std::vector<Patch> patches;
  patches.reserve(stamp_images.size() * cfg.patches_per_image);
  for (std::size_t i = 0; i < stamp_images.size(); ++i) {
    auto p = sample_patches(stamp_images[i], cfg.patch, cfg.patches_per_image, derive_seed(cfg.seed, 2000003 + i));
    patches.insert(patches.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  LearnedDictionary out;
  out.n_patches = patches.size();
  const Eigen::MatrixXd raw = patch_matrix(patches);
  out.whitening = fit_zca(raw, cfg.epsilon);
  const Eigen::MatrixXd white = apply_rows(out.whitening, raw);
  KMeansResult km = kmeans(white, cfg.patch, cfg.k, cfg.kmeans_iters, derive_seed(cfg.seed, 3000017));
  out.dictionary = std::move(km.dictionary);
  out.kmeans_iterations = km.iterations;
  return out;
}

/// Pick `cfg.ranking_images` stamp images at random and rank against them.
inline RankedDictionary rank_dictionary(const LearnedDictionary& ld, std::span<const GrayImage> stamp_images,
                                        const PipelineConfig& cfg) {
  require(!stamp_images.empty(), "rank_dictionary: no stamp images");
  Rng rng(derive_seed(cfg.seed, 4000037));
  std::vector<std::size_t> idx(stamp_images.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t r = std::clamp<std::size_t>(cfg.ranking_images, 1, stamp_images.size());
  std::vector<GrayImage> chosen;
  for (std::size_t i = 0; i < r; ++i) chosen.push_back(stamp_images[idx[i]]);
  AtomScores s = rank_atoms(ld.dictionary, ld.whitening, chosen);
  const std::size_t v = select_subset(s, cfg.tau);
  return make_ranked(ld.dictionary, ld.whitening, std::move(s), v);
}

/// All K atoms in rank order (v = K).
inline FilterSet full_filters(const RankedDictionary& rd) {
  return compose_filters(rd.dict, rd.whitening, rd.scores.rank);
}

inline LabeledSet extract_set(std::span<const GrayImage> images, std::span<const int> labels, const FilterSet& filters) {
  LabeledSet out;
  for (std::size_t i = 0; i < images.size(); ++i)
    out.push(extract(images[i], filters).values, labels[i] > 0 ? kStamp : kNonStamp);
  return out;
}

struct BenchRow {
  std::string method;
  std::size_t n_filters = 0;
  EvalReport report;
  double extract_time_s = 0.0;  // feature extraction over the test set
  double scoring_time_s = 0.0;  // SVM scoring over the test set
  double test_time_s() const { return extract_time_s + scoring_time_s; }
};

struct BenchResult {
  std::vector<BenchRow> rows;
  RankedDictionary ranked;
  Split split;
};

/// Four-way comparison: ranked subset, full dictionary, Gabor, random filters.
inline BenchResult run_bench(std::span<const LabeledImage> items, const PipelineConfig& cfg) {
  require(!items.empty(), "run_bench: empty dataset");
  const std::vector<GrayImage> inputs = verification_inputs(items, cfg);
  std::vector<int> labels;
  for (const auto& it : items) labels.push_back(it.label);

  BenchResult res;
  res.split = split(labels, cfg.train_fraction, derive_seed(cfg.seed, 5000011));
  std::vector<GrayImage> train_stamps;
  for (std::size_t i : res.split.train)
    if (labels[i] > 0) train_stamps.push_back(inputs[i]);
  require(!train_stamps.empty(), "run_bench: no stamp images in the training split");

  const LearnedDictionary ld = learn_dictionary(train_stamps, cfg);
  res.ranked = rank_dictionary(ld, train_stamps, cfg);

  const FilterBank gabor = gabor_bank(cfg.patch, 8, 8);
  const FilterBank random = random_bank(cfg.patch, cfg.k, derive_seed(cfg.seed, 6000001));
  struct Method {
    std::string name;
    FilterSet filters;
  };
  const std::vector<Method> methods = {{"K-means (ranked)", composed_filters(res.ranked)},
                                       {"K-means (all)", full_filters(res.ranked)},
                                       {"Gabor", to_filter_set(gabor)},
                                       {"RF", to_filter_set(random)}};

  auto gather = [&](const std::vector<std::size_t>& idx) {
    std::vector<GrayImage> imgs;
    std::vector<int> lab;
    for (std::size_t i : idx) {
      imgs.push_back(inputs[i]);
      lab.push_back(labels[i]);
    }
    return std::pair{std::move(imgs), std::move(lab)};
  };
  const auto [train_imgs, train_labels] = gather(res.split.train);
  const auto [test_imgs, test_labels] = gather(res.split.test);

  for (const Method& m : methods) {
    const LabeledSet train = extract_set(train_imgs, train_labels, m.filters);
    const auto t0 = std::chrono::steady_clock::now();
    const LabeledSet test = extract_set(test_imgs, test_labels, m.filters);
    const auto t1 = std::chrono::steady_clock::now();
    const LinearModel model = train_svm(train, cfg.svm_c, cfg.svm_epochs, derive_seed(cfg.seed, 7000003));
    BenchRow row;
    row.method = m.name;
    row.n_filters = m.filters.size();
    row.report = evaluate(model, test);
    row.extract_time_s = std::chrono::duration<double>(t1 - t0).count();
    row.scoring_time_s = row.report.test_time_seconds;
    res.rows.push_back(std::move(row));
  }
  return res;
}

}  // namespace stampfeat
