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

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "stampfeat/dictionary.hpp"
#include "stampfeat/filter_set.hpp"

namespace stampfeat {

enum class BankKind { gabor, random, learned };

inline const char* to_string(BankKind k) {
  switch (k) {
    case BankKind::gabor: return "gabor";
    case BankKind::random: return "random";
    case BankKind::learned: return "learned";
  }
  return "?";
}

/// Fixed filter bank in raw pixel space. Filters are zero-mean (except
/// learned ones) and unit-norm.
struct FilterBank {
  std::size_t side = 0;
  std::vector<Patch> filters;
  BankKind kind = BankKind::gabor;
  std::map<std::string, double> params;

  std::size_t size() const { return filters.size(); }
};

namespace detail {

inline void zero_mean_unit_norm(std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double norm = 0.0;
  for (double& x : v) {
    x -= mean;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
}

}  // namespace detail

/// Cosine-phase Gabor kernels. Wavelengths run geometrically from 4 px to
/// m px across scales, orientations are k*pi/n on [0, pi), aspect ratio 1,
/// one-octave bandwidth.
inline FilterBank gabor_bank(std::size_t m, std::size_t n_scales, std::size_t n_orientations) {
  require(m >= 3, "gabor_bank: side must be >= 3");
  require(n_scales >= 1 && n_orientations >= 1, "gabor_bank: counts must be >= 1");
  constexpr double kMinWavelength = 4.0;
  constexpr double kBandwidthOctaves = 1.0;
  // sigma / lambda for a given half-response bandwidth
  const double sigma_per_lambda = std::sqrt(std::log(2.0) / 2.0) / std::numbers::pi *
                                  (std::pow(2.0, kBandwidthOctaves) + 1.0) / (std::pow(2.0, kBandwidthOctaves) - 1.0);
  const double max_wavelength = static_cast<double>(m);

  FilterBank bank;
  bank.side = m;
  bank.kind = BankKind::gabor;
  bank.params = {{"n_scales", double(n_scales)},
                 {"n_orientations", double(n_orientations)},
                 {"min_wavelength", kMinWavelength},
                 {"max_wavelength", max_wavelength},
                 {"bandwidth_octaves", kBandwidthOctaves}};
  const double center = 0.5 * (static_cast<double>(m) - 1.0);
  for (std::size_t s = 0; s < n_scales; ++s) {
    const double t = n_scales > 1 ? static_cast<double>(s) / static_cast<double>(n_scales - 1) : 0.0;
    const double lambda = kMinWavelength * std::pow(max_wavelength / kMinWavelength, t);
    const double sigma = sigma_per_lambda * lambda;
    for (std::size_t o = 0; o < n_orientations; ++o) {
      const double theta = std::numbers::pi * static_cast<double>(o) / static_cast<double>(n_orientations);
      const double ct = std::cos(theta), st = std::sin(theta);
      std::vector<double> k(m * m);
      for (std::size_t y = 0; y < m; ++y) {
        for (std::size_t x = 0; x < m; ++x) {
          const double dx = static_cast<double>(x) - center;
          const double dy = static_cast<double>(y) - center;
          const double xr = dx * ct + dy * st;
          const double yr = -dx * st + dy * ct;
          k[y * m + x] = std::exp(-(xr * xr + yr * yr) / (2.0 * sigma * sigma)) *
                         std::cos(2.0 * std::numbers::pi * xr / lambda);
        }
      }
      detail::zero_mean_unit_norm(k);
      bank.filters.emplace_back(m, std::move(k));
    }
  }
  return bank;
}

/// I.i.d. standard-normal kernels, zero-meaned and unit-normalized.
inline FilterBank random_bank(std::size_t m, std::size_t count, std::uint64_t rng_seed) {
  require(m >= 1 && count >= 1, "random_bank: side and count must be >= 1");
  Rng rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FilterBank bank;
  bank.side = m;
  bank.kind = BankKind::random;
  bank.params = {{"count", double(count)}, {"seed", double(rng_seed)}};
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> k(m * m);
    for (double& v : k) v = normal(rng);
    detail::zero_mean_unit_norm(k);
    bank.filters.emplace_back(m, std::move(k));
  }
  return bank;
}

/// Fixed banks enter the feature path as filter sets with zero offsets.
inline FilterSet to_filter_set(const FilterBank& bank) {
  FilterSet fs;
  fs.side = bank.side;
  fs.kernels = bank.filters;
  fs.offsets.assign(bank.filters.size(), 0.0);
  return fs;
}

/// Learned atoms as a bank, in rank order (raw atoms, not pulled back).
inline FilterBank learned_bank(const RankedDictionary& rd, bool selected_only) {
  FilterBank bank;
  bank.side = rd.dict.atom_side;
  bank.kind = BankKind::learned;
  const std::size_t n = selected_only ? rd.v : rd.dict.k();
  for (std::size_t i = 0; i < n; ++i) {
    // Rows of a column-major matrix are strided; copy element-wise.
    const Eigen::RowVectorXd row = rd.dict.atoms.row(static_cast<Eigen::Index>(rd.scores.rank[i]));
    bank.filters.emplace_back(bank.side, std::vector<double>(row.data(), row.data() + row.size()));
  }
  bank.params = {{"k", double(rd.dict.k())}, {"v", double(rd.v)}};
  return bank;
}

}  // namespace stampfeat
