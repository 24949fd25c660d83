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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stampfeat/filter_set.hpp"
#include "stampfeat/imaging.hpp"
#include "stampfeat/whitening.hpp"

namespace stampfeat {

/// K unit-norm atoms in whitened patch space, one per row.
struct Dictionary {
  std::size_t atom_side = 0;
  Eigen::MatrixXd atoms;  // k x side^2

  std::size_t k() const { return static_cast<std::size_t>(atoms.rows()); }
};

/// Per-atom ranking scores and the descending-order permutation.
struct AtomScores {
  std::vector<double> scores;
  std::vector<std::size_t> rank;
};

struct RankedDictionary {
  Dictionary dict;
  AtomScores scores;
  std::size_t v = 0;
  WhiteningTransform whitening;

  std::span<const std::size_t> selected() const { return {scores.rank.data(), v}; }
};

struct KMeansResult {
  Dictionary dictionary;
  Eigen::MatrixXd centroids;       // before unit normalization
  std::vector<int> labels;
  std::vector<double> sse_history;  // within-cluster SSE after each assignment step
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Squared distances from every row of x to every row of c (n x k).
inline Eigen::MatrixXd sq_distances(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_sq, const Eigen::MatrixXd& c) {
  Eigen::MatrixXd d = -2.0 * (x * c.transpose());
  d.colwise() += x_sq;
  d.rowwise() += c.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

inline Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_sq, std::size_t k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c(static_cast<Eigen::Index>(k), x.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  c.row(0) = x.row(pick(rng));
  Eigen::VectorXd best = sq_distances(x, x_sq, c.topRows(1)).col(0);
  for (std::size_t j = 1; j < k; ++j) {
    const double total = best.sum();
    Eigen::Index chosen;
    if (total > 0.0) {
      std::discrete_distribution<Eigen::Index> dd(best.data(), best.data() + n);
      chosen = dd(rng);
    } else {
      chosen = pick(rng);
    }
    c.row(static_cast<Eigen::Index>(j)) = x.row(chosen);
    const Eigen::VectorXd dj = sq_distances(x, x_sq, c.row(static_cast<Eigen::Index>(j))).col(0);
    best = best.cwiseMin(dj);
  }
  return c;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Rows of `samples` are points.
/// Atoms in the returned dictionary are the centroids scaled to unit norm.
inline KMeansResult kmeans(const Eigen::MatrixXd& samples, std::size_t atom_side, std::size_t k, int max_iters,
                           std::uint64_t rng_seed) {
  require(k >= 1, "kmeans: k must be >= 1");
  require(static_cast<Eigen::Index>(k) <= samples.rows(), "kmeans: more clusters than points");
  require(samples.allFinite(), "kmeans: non-finite input");
  require(max_iters >= 1, "kmeans: max_iters must be >= 1");
  const Eigen::Index n = samples.rows();
  const Eigen::Index kk = static_cast<Eigen::Index>(k);
  const Eigen::VectorXd x_sq = samples.rowwise().squaredNorm();

  Rng rng(rng_seed);
  KMeansResult res;
  Eigen::MatrixXd c = detail::kmeanspp_seed(samples, x_sq, k, rng);
  std::vector<int> labels(n, -1);
  Eigen::VectorXd dist(n);

  for (int it = 0; it < max_iters; ++it) {
    const Eigen::MatrixXd d = detail::sq_distances(samples, x_sq, c);
    bool changed = false;
    double sse = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best;
      dist[i] = d.row(i).minCoeff(&best);  // first minimum wins ties
      sse += dist[i];
      if (labels[i] != static_cast<int>(best)) {
        labels[i] = static_cast<int>(best);
        changed = true;
      }
    }
    res.sse_history.push_back(sse);
    res.iterations = it + 1;
    if (!changed) {
      res.converged = true;
      break;
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kk, samples.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[i]) += samples.row(i);
      ++counts[labels[i]];
    }
    std::vector<bool> taken(n, false);
    for (Eigen::Index j = 0; j < kk; ++j) {
      if (counts[j] > 0) {
        c.row(j) = sums.row(j) / static_cast<double>(counts[j]);
        continue;
      }
      // Empty cluster: restart from the point farthest from its centroid.
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!taken[i] && (far < 0 || dist[i] > dist[far])) far = i;
      taken[far] = true;
      c.row(j) = samples.row(far);
    }
  }

  res.centroids = c;
  res.labels = std::move(labels);
  res.dictionary.atom_side = atom_side;
  res.dictionary.atoms = c;
  for (Eigen::Index j = 0; j < kk; ++j) {
    const double norm = c.row(j).norm();
    if (norm > 0.0) {
      res.dictionary.atoms.row(j) /= norm;
    } else {
      // A centroid exactly at the origin has no direction; pin it to e_0.
      res.dictionary.atoms.row(j).setZero();
      res.dictionary.atoms(j, 0) = 1.0;
    }
  }
  return res;
}

inline KMeansResult kmeans(std::span<const Patch> whitened, std::size_t k, int max_iters, std::uint64_t rng_seed) {
  require(!whitened.empty(), "kmeans: no patches");
  return kmeans(patch_matrix(whitened), whitened.front().side, k, max_iters, rng_seed);
}

/// Pull atoms back into raw pixel space so that correlating the raw image
/// with kernel j and adding offset j equals atom_j . whiten(window).
inline FilterSet compose_filters(const Dictionary& d, const WhiteningTransform& w, std::span<const std::size_t> atoms) {
  const Eigen::Index dim = static_cast<Eigen::Index>(d.atom_side * d.atom_side);
  require(d.atoms.cols() == dim, "compose_filters: atom length does not match atom side");
  require(w.dim() == dim, "compose_filters: whitening dimension does not match atoms");
  FilterSet fs;
  fs.side = d.atom_side;
  for (std::size_t j : atoms) {
    require(j < d.k(), "compose_filters: atom index out of range");
    const Eigen::VectorXd f = w.matrix.transpose() * d.atoms.row(static_cast<Eigen::Index>(j)).transpose();
    fs.kernels.emplace_back(d.atom_side, std::vector<double>(f.data(), f.data() + f.size()));
    fs.offsets.push_back(-f.dot(w.mean));
  }
  return fs;
}

inline FilterSet composed_filters(const RankedDictionary& rd) {
  require(rd.v >= 1 && rd.v <= rd.dict.k() && rd.scores.rank.size() == rd.dict.k(),
          "composed_filters: malformed ranked dictionary");
  return compose_filters(rd.dict, rd.whitening, rd.selected());
}

/// Descending order of scores; ties keep the lower atom index first.
inline std::vector<std::size_t> descending_rank(std::span<const double> scores) {
  std::vector<std::size_t> rank(scores.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return rank;
}

/// Rectified, center-weighted response grids R_j(p) = (1 - y_c(p)) * max(0, atom_j . whiten(window_p)),
/// computed as correlation + ReLU + pixel-wise product with the inverted image.
inline std::vector<ResponseMap> atom_responses(const Dictionary& d, const WhiteningTransform& w,
                                               const GrayImage& img, std::span<const std::size_t> atoms) {
  require(d.k() > 0, "atom_responses: empty dictionary");
  require(d.atom_side <= img.height && d.atom_side <= img.width, "atom_responses: image smaller than atom");
  const FilterSet fs = compose_filters(d, w, atoms);
  const GrayImage centers = center_intensities(img, d.atom_side);
  std::vector<ResponseMap> out;
  out.reserve(fs.size());
  for (std::size_t j = 0; j < fs.size(); ++j) {
    ResponseMap r = filter_response(img, fs, j);
    for (std::size_t i = 0; i < r.size(); ++i) r.data[i] = (1.0 - centers.data[i]) * std::max(0.0, r.data[i]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<std::size_t> all_atoms(const Dictionary& d) {
  std::vector<std::size_t> idx(d.k());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

/// Scores are each atom's maximum rectified response, averaged over the
/// ranking images when more than one is supplied.
inline AtomScores rank_atoms(const Dictionary& d, const WhiteningTransform& w, std::span<const GrayImage> ranking_images) {
  require(d.k() > 0, "rank_atoms: empty dictionary");
  require(!ranking_images.empty(), "rank_atoms: no ranking image");
  const auto idx = all_atoms(d);
  AtomScores s;
  s.scores.assign(d.k(), 0.0);
  for (const GrayImage& img : ranking_images) {
    const auto maps = atom_responses(d, w, img, idx);
    for (std::size_t j = 0; j < maps.size(); ++j)
      s.scores[j] += *std::max_element(maps[j].data.begin(), maps[j].data.end());
  }
  for (double& v : s.scores) v /= static_cast<double>(ranking_images.size());
  s.rank = descending_rank(s.scores);
  return s;
}

inline AtomScores rank_atoms(const Dictionary& d, const WhiteningTransform& w, const GrayImage& ranking_image) {
  return rank_atoms(d, w, std::span<const GrayImage>(&ranking_image, 1));
}

inline constexpr double kDefaultTau = 0.33;

/// Number of atoms whose score reaches tau times the best score.
inline std::size_t select_subset(const AtomScores& s, double tau = kDefaultTau) {
  require(!s.scores.empty(), "select_subset: empty scores");
  const double best = *std::max_element(s.scores.begin(), s.scores.end());
  const double cut = tau * best;
  const auto v = static_cast<std::size_t>(std::count_if(s.scores.begin(), s.scores.end(), [&](double x) { return x >= cut; }));
  return std::max<std::size_t>(v, 1);
}

inline RankedDictionary make_ranked(Dictionary d, WhiteningTransform w, AtomScores s, std::size_t v) {
  require(v >= 1 && v <= d.k(), "make_ranked: v out of range");
  require(s.rank.size() == d.k() && s.scores.size() == d.k(), "make_ranked: scores do not match dictionary");
  return {std::move(d), std::move(s), v, std::move(w)};
}

/// Unranked dictionary with identity order and v = k.
inline RankedDictionary unranked(Dictionary d, WhiteningTransform w) {
  AtomScores s;
  s.scores.assign(d.k(), 0.0);
  s.rank = all_atoms(d);
  const std::size_t k = d.k();
  return {std::move(d), std::move(s), k, std::move(w)};
}

}  // namespace stampfeat
