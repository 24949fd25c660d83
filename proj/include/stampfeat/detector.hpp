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
#include <utility>
#include <vector>

#include "stampfeat/dictionary.hpp"
#include "stampfeat/filter_set.hpp"
#include "stampfeat/imaging.hpp"

namespace stampfeat {

/// Average over filters of (1 - y_c) * max(0, response), on the valid grid.
inline ResponseMap response_map(const GrayImage& img, const FilterSet& filters) {
  require(filters.size() > 0, "response_map: no filters");
  require(filters.side <= img.height && filters.side <= img.width, "response_map: image smaller than filters");
  const GrayImage centers = center_intensities(img, filters.side);
  ResponseMap acc(centers.height, centers.width);
  for (std::size_t j = 0; j < filters.size(); ++j) {
    const ResponseMap r = filter_response(img, filters, j);
    for (std::size_t i = 0; i < r.size(); ++i) acc.data[i] += std::max(0.0, r.data[i]);
  }
  const double inv = 1.0 / static_cast<double>(filters.size());
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] *= inv * (1.0 - centers.data[i]);
  return acc;
}

inline ResponseMap response_map(const GrayImage& img, const RankedDictionary& rd) {
  return response_map(img, composed_filters(rd));
}

struct WindowHit {
  std::size_t y = 0;
  std::size_t x = 0;
  double sum = 0.0;
};

/// Origin of the win_h x win_w window with the largest enclosed sum, via a
/// summed-area table. Ties (within rounding of the table) go to the topmost,
/// then leftmost origin.
inline WindowHit locate_window(const ResponseMap& map, std::size_t win_h, std::size_t win_w) {
  require(win_h > 0 && win_w > 0, "locate_window: empty window");
  require(win_h <= map.height && win_w <= map.width, "locate_window: window larger than map");
  const std::size_t sw = map.width + 1;
  std::vector<double> sat((map.height + 1) * sw, 0.0);
  double mass = 0.0;
  for (std::size_t y = 0; y < map.height; ++y) {
    double run = 0.0;
    for (std::size_t x = 0; x < map.width; ++x) {
      run += map.at(y, x);
      mass += std::abs(map.at(y, x));
      sat[(y + 1) * sw + x + 1] = sat[y * sw + x + 1] + run;
    }
  }
  // Sums from the table carry rounding proportional to the total mass.
  const double tie = 1e-12 * mass;
  WindowHit best{0, 0, 0.0};
  bool first = true;
  for (std::size_t y = 0; y + win_h <= map.height; ++y) {
    for (std::size_t x = 0; x + win_w <= map.width; ++x) {
      const double s = sat[(y + win_h) * sw + x + win_w] - sat[y * sw + x + win_w] - sat[(y + win_h) * sw + x] +
                       sat[y * sw + x];
      if (first || s > best.sum + tie) {
        best = {y, x, s};
        first = false;
      }
    }
  }
  return best;
}

/// Tight box of window pixels strictly above theta * (window max), mapped
/// from response-grid to image coordinates by the correlation offset m/2.
/// With nothing above threshold the window itself is returned.
inline BoundingBox refine_box(const ResponseMap& map, const WindowHit& window, std::size_t win_h, std::size_t win_w,
                              double theta, std::size_t kernel_side) {
  require(window.y + win_h <= map.height && window.x + win_w <= map.width, "refine_box: window outside map");
  const int off = static_cast<int>(kernel_side / 2);
  double peak = 0.0;
  for (std::size_t y = window.y; y < window.y + win_h; ++y)
    for (std::size_t x = window.x; x < window.x + win_w; ++x) peak = std::max(peak, map.at(y, x));

  BoundingBox win_box{static_cast<int>(window.x) + off, static_cast<int>(window.y) + off,
                      static_cast<int>(window.x + win_w) + off, static_cast<int>(window.y + win_h) + off};
  if (!(peak > 0.0)) return win_box;

  const double cut = theta * peak;
  int x0 = std::numeric_limits<int>::max(), y0 = x0, x1 = -1, y1 = -1;
  for (std::size_t y = window.y; y < window.y + win_h; ++y) {
    for (std::size_t x = window.x; x < window.x + win_w; ++x) {
      if (map.at(y, x) > cut) {
        x0 = std::min(x0, static_cast<int>(x));
        y0 = std::min(y0, static_cast<int>(y));
        x1 = std::max(x1, static_cast<int>(x));
        y1 = std::max(y1, static_cast<int>(y));
      }
    }
  }
  if (x1 < 0) return win_box;
  return {x0 + off, y0 + off, x1 + 1 + off, y1 + 1 + off};
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const BoundingBox inter{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
  const long i = inter.valid() ? inter.area() : 0;
  const long u = a.area() + b.area() - i;
  return u > 0 ? static_cast<double>(i) / static_cast<double>(u) : 0.0;
}

struct DetectParams {
  double window_frac_h = 0.45;
  double window_frac_w = 0.55;
  double theta = 0.3;
  bool lower_half_only = false;
  double peak_floor = 0.0;  // peak <= floor means "no stamp"
};

struct DetectionResult {
  BoundingBox box;
  double response_peak = 0.0;
  std::size_t window_y = 0;
  std::size_t window_x = 0;
  std::size_t window_h = 0;
  std::size_t window_w = 0;

  bool found(double floor = 0.0) const { return response_peak > floor; }
};

/// Window size in response-grid pixels for a page of the given size.
inline std::pair<std::size_t, std::size_t> detection_window(const ResponseMap& map, std::size_t page_h,
                                                            std::size_t page_w, const DetectParams& p) {
  auto clampdim = [](double v, std::size_t hi) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(v)), 1, hi);
  };
  return {clampdim(p.window_frac_h * page_h, map.height), clampdim(p.window_frac_w * page_w, map.width)};
}

inline DetectionResult detect(const GrayImage& page, const FilterSet& filters, const DetectParams& p = {}) {
  require(p.theta > 0.0 && p.theta < 1.0, "detect: theta must be in (0,1)");
  ResponseMap map = response_map(page, filters);
  if (p.lower_half_only) {
    // Suppress responses whose window center lies in the upper half.
    const std::size_t c = filters.side / 2;
    for (std::size_t y = 0; y < map.height && y + c < page.height / 2; ++y)
      for (double& v : map.row(y)) v = 0.0;
  }
  const auto [wh, ww] = detection_window(map, page.height, page.width, p);
  const WindowHit hit = locate_window(map, wh, ww);
  DetectionResult r;
  r.box = refine_box(map, hit, wh, ww, p.theta, filters.side);
  r.window_y = hit.y;
  r.window_x = hit.x;
  r.window_h = wh;
  r.window_w = ww;
  for (std::size_t y = hit.y; y < hit.y + wh; ++y)
    for (std::size_t x = hit.x; x < hit.x + ww; ++x) r.response_peak = std::max(r.response_peak, map.at(y, x));
  return r;
}

inline DetectionResult detect(const GrayImage& page, const RankedDictionary& rd, const DetectParams& p = {}) {
  return detect(page, composed_filters(rd), p);
}

}  // namespace stampfeat
