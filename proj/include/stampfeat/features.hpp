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
#include <array>
#include <limits>
#include <vector>

#include "stampfeat/dictionary.hpp"
#include "stampfeat/filter_set.hpp"

namespace stampfeat {

/// 1-of-K encoded maps: at each position at most one map is nonzero.
struct EncodedMaps {
  std::vector<ResponseMap> maps;
};

struct FeatureVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

inline constexpr std::size_t kPoolGrid = 4;

/// Keep, per position, only the map with the largest raw response (lowest
/// index on ties). The kept value is the raw response and may be negative.
inline EncodedMaps encode_responses(std::vector<ResponseMap> responses) {
  require(!responses.empty(), "encode: no response maps");
  const std::size_t n = responses.front().size();
  for (const auto& r : responses) require(r.size() == n, "encode: response maps differ in size");
  std::vector<std::size_t> winner(n, 0);
  std::vector<double> best(responses.front().data);
  for (std::size_t j = 1; j < responses.size(); ++j) {
    const auto& r = responses[j].data;
    for (std::size_t i = 0; i < n; ++i) {
      if (r[i] > best[i]) {
        best[i] = r[i];
        winner[i] = j;
      }
    }
  }
  for (std::size_t j = 0; j < responses.size(); ++j) {
    auto& r = responses[j].data;
    for (std::size_t i = 0; i < n; ++i)
      if (winner[i] != j) r[i] = 0.0;
  }
  return {std::move(responses)};
}

inline EncodedMaps encode(const GrayImage& img, const FilterSet& filters) {
  return encode_responses(filter_responses(img, filters));
}

inline EncodedMaps encode(const GrayImage& img, const RankedDictionary& rd) { return encode(img, composed_filters(rd)); }

/// Cell boundaries for splitting `len` into kPoolGrid parts; the remainder
/// goes to the trailing cells.
inline std::array<std::size_t, kPoolGrid + 1> pool_edges(std::size_t len) {
  std::array<std::size_t, kPoolGrid + 1> e{};
  const std::size_t base = len / kPoolGrid;
  const std::size_t rem = len % kPoolGrid;
  for (std::size_t i = 0; i < kPoolGrid; ++i) e[i + 1] = e[i] + base + (i >= kPoolGrid - rem ? 1 : 0);
  return e;
}

inline FeatureVector quadrant_max_pool(const EncodedMaps& enc) {
  require(!enc.maps.empty(), "quadrant_max_pool: no maps");
  FeatureVector fv;
  fv.values.reserve(enc.maps.size() * kPoolGrid * kPoolGrid);
  for (const ResponseMap& m : enc.maps) {
    require(m.height >= kPoolGrid && m.width >= kPoolGrid, "quadrant_max_pool: map smaller than 4x4");
    const auto ey = pool_edges(m.height);
    const auto ex = pool_edges(m.width);
    for (std::size_t cy = 0; cy < kPoolGrid; ++cy) {
      for (std::size_t cx = 0; cx < kPoolGrid; ++cx) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t y = ey[cy]; y < ey[cy + 1]; ++y) {
          auto r = m.row(y);
          best = std::max(best, *std::max_element(r.begin() + ex[cx], r.begin() + ex[cx + 1]));
        }
        fv.values.push_back(best);
      }
    }
  }
  return fv;
}

inline FeatureVector extract(const GrayImage& img, const FilterSet& filters) {
  return quadrant_max_pool(encode(img, filters));
}

inline FeatureVector extract(const GrayImage& img, const RankedDictionary& rd) {
  return extract(img, composed_filters(rd));
}

}  // namespace stampfeat
