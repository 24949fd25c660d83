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
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stampfeat/common.hpp"

namespace stampfeat {

/// Row-major 2-D grid of doubles.
///
/// Preprocessed images hold intensities in [0,1]. The same type also carries
/// filter response maps, which are unbounded and exempt from that range.
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), data(h * w, fill) {}

  bool empty() const { return data.empty(); }
  std::size_t size() const { return data.size(); }

  double& at(std::size_t y, std::size_t x) { return data[y * width + x]; }
  double at(std::size_t y, std::size_t x) const { return data[y * width + x]; }

  std::span<double> row(std::size_t y) { return {data.data() + y * width, width}; }
  std::span<const double> row(std::size_t y) const { return {data.data() + y * width, width}; }

  bool operator==(const GrayImage&) const = default;
};

/// Response maps share the grid type but not the [0,1] invariant.
using ResponseMap = GrayImage;

/// Square m x m block of reals, row-major.
struct Patch {
  std::size_t side = 0;
  std::vector<double> data;

  Patch() = default;
  explicit Patch(std::size_t m, double fill = 0.0) : side(m), data(m * m, fill) {}
  Patch(std::size_t m, std::vector<double> values) : side(m), data(std::move(values)) {
    require(m > 0 && data.size() == m * m, "Patch: data length must equal side^2");
  }

  double& at(std::size_t y, std::size_t x) { return data[y * side + x]; }
  double at(std::size_t y, std::size_t x) const { return data[y * side + x]; }

  bool operator==(const Patch&) const = default;
};

/// Axis-aligned box; x1/y1 are exclusive.
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  long area() const { return static_cast<long>(std::max(0, width())) * std::max(0, height()); }
  bool valid() const { return x0 < x1 && y0 < y1; }
  bool inside(std::size_t img_h, std::size_t img_w) const {
    return valid() && x0 >= 0 && y0 >= 0 && x1 <= static_cast<int>(img_w) && y1 <= static_cast<int>(img_h);
  }
  double center_x() const { return 0.5 * (x0 + x1); }
  double center_y() const { return 0.5 * (y0 + y1); }

  bool operator==(const BoundingBox&) const = default;
};

/// Interleaved 8-bit RGB image.
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;  // r,g,b per pixel

  RgbImage() = default;
  RgbImage(std::size_t h, std::size_t w) : height(h), width(w), data(h * w * 3, 0) {}
};

/// BT.601 luma, scaled to [0,1].
inline GrayImage to_grayscale(const RgbImage& rgb) {
  require(rgb.height > 0 && rgb.width > 0, "to_grayscale: empty image");
  require(rgb.data.size() == rgb.height * rgb.width * 3, "to_grayscale: channel data size mismatch");
  GrayImage out(rgb.height, rgb.width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = rgb.data[3 * i];
    const double g = rgb.data[3 * i + 1];
    const double b = rgb.data[3 * i + 2];
    out.data[i] = std::clamp((0.299 * r + 0.587 * g + 0.114 * b) / 255.0, 0.0, 1.0);
  }
  return out;
}

/// Bilinear resize with half-pixel centers and edge clamping.
inline GrayImage resize(const GrayImage& img, std::size_t out_h, std::size_t out_w) {
  require(out_h > 0 && out_w > 0, "resize: target dimensions must be positive");
  require(!img.empty(), "resize: empty image");
  if (out_h == img.height && out_w == img.width) return img;

  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;

  // Precompute column taps once per output column.
  std::vector<std::size_t> x_lo(out_w), x_hi(out_w);
  std::vector<double> x_frac(out_w);
  for (std::size_t x = 0; x < out_w; ++x) {
    double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
    x_lo[x] = static_cast<std::size_t>(fx);
    x_hi[x] = std::min(x_lo[x] + 1, img.width - 1);
    x_frac[x] = fx - x_lo[x];
  }

  GrayImage out(out_h, out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    auto r0 = img.row(y0);
    auto r1 = img.row(y1);
    for (std::size_t x = 0; x < out_w; ++x) {
      const double wx = x_frac[x];
      const double top = (1.0 - wx) * r0[x_lo[x]] + wx * r0[x_hi[x]];
      const double bot = (1.0 - wx) * r1[x_lo[x]] + wx * r1[x_hi[x]];
      out.at(y, x) = (1.0 - wy) * top + wy * bot;
    }
  }
  return out;
}

/// Per-image min-max stretch to [0,1]; constant images map to zeros.
inline GrayImage normalize(const GrayImage& img) {
  require(!img.empty(), "normalize: empty image");
  const auto [lo_it, hi_it] = std::minmax_element(img.data.begin(), img.data.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  GrayImage out(img.height, img.width);
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < img.size(); ++i) out.data[i] = std::clamp((img.data[i] - lo) / range, 0.0, 1.0);
  return out;
}

/// Copy of the m x m window with top-left (y, x).
inline Patch window_at(const GrayImage& img, std::size_t y, std::size_t x, std::size_t m) {
  Patch p(m);
  for (std::size_t dy = 0; dy < m; ++dy) {
    auto src = img.row(y + dy).subspan(x, m);
    std::copy(src.begin(), src.end(), p.data.begin() + dy * m);
  }
  return p;
}

/// Crop clipped to the image; throws if nothing remains.
inline GrayImage crop(const GrayImage& img, BoundingBox box) {
  box.x0 = std::max(box.x0, 0);
  box.y0 = std::max(box.y0, 0);
  box.x1 = std::min(box.x1, static_cast<int>(img.width));
  box.y1 = std::min(box.y1, static_cast<int>(img.height));
  require(box.valid(), "crop: box does not intersect image");
  GrayImage out(box.height(), box.width());
  for (int y = 0; y < box.height(); ++y) {
    auto src = img.row(box.y0 + y).subspan(box.x0, box.width());
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

inline std::vector<Patch> sample_patches(const GrayImage& img, std::size_t m, std::size_t count,
                                         std::uint64_t rng_seed) {
  require(m > 0 && m <= img.height && m <= img.width, "sample_patches: patch larger than image");
  require(count >= 1, "sample_patches: count must be >= 1");
  Rng rng(rng_seed);
  std::uniform_int_distribution<std::size_t> ys(0, img.height - m);
  std::uniform_int_distribution<std::size_t> xs(0, img.width - m);
  std::vector<Patch> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t y = ys(rng);
    const std::size_t x = xs(rng);
    out.push_back(window_at(img, y, x, m));
  }
  return out;
}

struct DensePatch {
  Patch patch;
  double center_intensity = 0.0;  // raw value at (floor(m/2), floor(m/2))
  std::size_t y = 0;
  std::size_t x = 0;
};

/// Every m x m window at stride 1, row-major scan order.
inline std::vector<DensePatch> dense_patches(const GrayImage& img, std::size_t m) {
  require(m > 0 && m <= img.height && m <= img.width, "dense_patches: patch larger than image");
  const std::size_t oh = img.height - m + 1;
  const std::size_t ow = img.width - m + 1;
  const std::size_t c = m / 2;
  std::vector<DensePatch> out;
  out.reserve(oh * ow);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) out.push_back({window_at(img, y, x, m), img.at(y + c, x + c), y, x});
  return out;
}

/// Valid-mode cross-correlation (no kernel flip). Output is an unclamped
/// response map of size (H-m+1) x (W-m+1).
inline ResponseMap xcorr_valid(const GrayImage& img, const Patch& kernel) {
  const std::size_t m = kernel.side;
  require(m > 0 && kernel.data.size() == m * m, "xcorr_valid: malformed kernel");
  require(m <= img.height && m <= img.width, "xcorr_valid: kernel larger than image");
  const std::size_t oh = img.height - m + 1;
  const std::size_t ow = img.width - m + 1;
  ResponseMap out(oh, ow);
  for (std::size_t y = 0; y < oh; ++y) {
    double* dst = out.data.data() + y * ow;
    for (std::size_t ky = 0; ky < m; ++ky) {
      const double* src = img.data.data() + (y + ky) * img.width;
      const double* krow = kernel.data.data() + ky * m;
      const std::size_t blocked = m - m % 4;
      // Four taps per pass keeps the output row traffic down.
      for (std::size_t kx = 0; kx < blocked; kx += 4) {
        const double w0 = krow[kx], w1 = krow[kx + 1], w2 = krow[kx + 2], w3 = krow[kx + 3];
        const double* s = src + kx;
        for (std::size_t x = 0; x < ow; ++x) dst[x] += w0 * s[x] + w1 * s[x + 1] + w2 * s[x + 2] + w3 * s[x + 3];
      }
      for (std::size_t kx = blocked; kx < m; ++kx) {
        const double w = krow[kx];
        const double* s = src + kx;
        for (std::size_t x = 0; x < ow; ++x) dst[x] += w * s[x];
      }
    }
  }
  return out;
}

/// Raw intensity at each valid-correlation window center, on the response grid.
inline GrayImage center_intensities(const GrayImage& img, std::size_t m) {
  require(m > 0 && m <= img.height && m <= img.width, "center_intensities: patch larger than image");
  const std::size_t c = m / 2;
  GrayImage out(img.height - m + 1, img.width - m + 1);
  for (std::size_t y = 0; y < out.height; ++y)
    for (std::size_t x = 0; x < out.width; ++x) out.at(y, x) = img.at(y + c, x + c);
  return out;
}

}  // namespace stampfeat
