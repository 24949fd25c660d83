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
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "stampfeat/imaging.hpp"

namespace stampfeat {

enum class StampShape { circle, ellipse, double_ring };
enum class NegativeKind { text, border, background };

inline const char* to_string(StampShape s) {
  switch (s) {
    case StampShape::circle: return "circle";
    case StampShape::ellipse: return "ellipse";
    case StampShape::double_ring: return "double-ring";
  }
  return "?";
}

inline const char* to_string(NegativeKind k) {
  switch (k) {
    case NegativeKind::text: return "text";
    case NegativeKind::border: return "border";
    case NegativeKind::background: return "background";
  }
  return "?";
}

/// Everything needed to render one page; the seed fixes the page bit-exactly.
struct SynthSpec {
  std::size_t page_h = 300;
  std::size_t page_w = 200;
  StampShape shape = StampShape::circle;
  double background = 0.94;
  double ink_min = 0.05;  // stamp ink, darker than the background
  double ink_max = 0.30;
  double text_min = 0.60;  // simulated text, light gray
  double text_max = 0.80;
  double text_density = 0.6;  // fraction of text-line slots drawn
  double noise_sigma = 0.02;
  double fade = 0.0;              // 0 = full ink, 1 = ink equals background
  std::size_t lowres_factor = 1;  // >1 downscales then upscales by this factor
  double diameter_min = 60.0;
  double diameter_max = 90.0;
  std::optional<BoundingBox> placement;  // default: lower half of the page
  std::uint64_t seed = 0;

  BoundingBox placement_region() const {
    if (placement) return *placement;
    return {0, static_cast<int>(page_h / 2), static_cast<int>(page_w), static_cast<int>(page_h)};
  }

  void validate() const {
    require(page_h >= 16 && page_w >= 16, "SynthSpec: page too small");
    require(ink_min <= ink_max && ink_max < background && background <= 1.0 && ink_min >= 0.0,
            "SynthSpec: ink must be darker than the background");
    require(text_min <= text_max && text_max <= background, "SynthSpec: text intensity range invalid");
    require(fade >= 0.0 && fade <= 1.0, "SynthSpec: fade must be in [0,1]");
    require(text_density >= 0.0 && text_density <= 1.0, "SynthSpec: text density must be in [0,1]");
    require(noise_sigma >= 0.0, "SynthSpec: negative noise");
    require(lowres_factor >= 1, "SynthSpec: lowres factor must be >= 1");
    require(diameter_min > 4.0 && diameter_min <= diameter_max, "SynthSpec: invalid diameter range");
    require(placement_region().inside(page_h, page_w), "SynthSpec: placement region outside page");
  }
};

struct SynthSample {
  GrayImage page;
  std::optional<BoundingBox> stamp_box;
  int label = 0;  // 1 stamp, 0 non-stamp
};

namespace synth_detail {

using Mask = std::vector<std::uint8_t>;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Darken-only compositing of a constant level through a mask.
inline void composite(GrayImage& page, const Mask& mask, double level) {
  for (std::size_t i = 0; i < page.size(); ++i)
    if (mask[i]) page.data[i] = std::min(page.data[i], level);
}

inline void disc(Mask& mask, std::size_t h, std::size_t w, double cx, double cy, double r) {
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
  const int y1 = std::min(static_cast<int>(h) - 1, static_cast<int>(std::ceil(cy + r)));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
  const int x1 = std::min(static_cast<int>(w) - 1, static_cast<int>(std::ceil(cx + r)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      if (dx * dx + dy * dy <= r * r) mask[y * w + x] = 1;
    }
}

// Elliptical ring: inside the outer ellipse and outside the inner one.
inline void ring(Mask& mask, std::size_t h, std::size_t w, double cx, double cy, double rx, double ry, double t) {
  const double ix = rx - t, iy = ry - t;
  for (std::size_t y = 0; y < h; ++y) {
    const double dy = y + 0.5 - cy;
    if (std::abs(dy) > ry) continue;
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = x + 0.5 - cx;
      const double outer = (dx * dx) / (rx * rx) + (dy * dy) / (ry * ry);
      const double inner = (dx * dx) / (ix * ix) + (dy * dy) / (iy * iy);
      if (outer <= 1.0 && inner > 1.0) mask[y * w + x] = 1;
    }
  }
}

// Rows of small glyph blocks between y_begin and y_end.
inline void text_lines(GrayImage& page, Rng& rng, int y_begin, int y_end, double density, double lo, double hi) {
  const int h = static_cast<int>(page.height), w = static_cast<int>(page.width);
  constexpr int kLinePitch = 14;
  constexpr int kGlyphH = 7;
  const int margin = std::max(4, w / 20);
  for (int base = y_begin + 6; base + kGlyphH < y_end; base += kLinePitch) {
    if (uniform(rng, 0.0, 1.0) >= density) continue;
    const double level = uniform(rng, lo, hi);
    int x = margin + uniform_int(rng, 0, 12);
    const int line_end = w - margin - uniform_int(rng, 0, w / 4);
    while (x < line_end) {
      const int n_chars = uniform_int(rng, 2, 8);
      for (int c = 0; c < n_chars && x + 3 < line_end; ++c, x += 4) {
        // 3 x kGlyphH glyph with a guaranteed vertical stroke
        const int stroke = uniform_int(rng, 0, 2);
        for (int gy = 0; gy < kGlyphH; ++gy)
          for (int gx = 0; gx < 3; ++gx) {
            const bool ink = gx == stroke || uniform(rng, 0.0, 1.0) < 0.35;
            const int py = base + gy, px = x + gx;
            if (ink && py < h && px < w) page.at(py, px) = std::min(page.at(py, px), level);
          }
      }
      x += uniform_int(rng, 4, 8);
    }
  }
}

inline void degrade(GrayImage& page, Rng& rng, std::size_t lowres_factor, double noise_sigma) {
  if (lowres_factor > 1) {
    const std::size_t sh = std::max<std::size_t>(1, page.height / lowres_factor);
    const std::size_t sw = std::max<std::size_t>(1, page.width / lowres_factor);
    page = resize(resize(page, sh, sw), page.height, page.width);
  }
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (double& v : page.data) v = std::clamp(v + noise(rng), 0.0, 1.0);
  }
}

}  // namespace synth_detail

/// Stamp ink mask and its tight bounding box.
struct StampMask {
  synth_detail::Mask mask;
  BoundingBox box;
};

/// Rings, an arc of text dots and a central emblem blob.
inline StampMask render_stamp_mask(std::size_t h, std::size_t w, StampShape shape, double cx, double cy, double rx,
                                   double ry, Rng& rng) {
  using namespace synth_detail;
  StampMask sm{Mask(h * w, 0), {}};
  const double t = uniform(rng, 2.0, 4.0);
  ring(sm.mask, h, w, cx, cy, rx, ry, t);
  double dot_frac = 0.74;
  if (shape == StampShape::double_ring) {
    ring(sm.mask, h, w, cx, cy, 0.66 * rx, 0.66 * ry, std::max(1.5, t - 1.0));
    dot_frac = 0.83;
  }
  // Arced lettering approximated by dots with gaps between "words".
  const int n_dots = uniform_int(rng, 18, 30);
  const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double dot_r = uniform(rng, 1.2, 1.8);
  for (int i = 0; i < n_dots; ++i) {
    if (uniform(rng, 0.0, 1.0) < 0.2) continue;
    const double a = phase + 2.0 * std::numbers::pi * i / n_dots;
    disc(sm.mask, h, w, cx + dot_frac * (rx - t) * std::cos(a), cy + dot_frac * (ry - t) * std::sin(a), dot_r);
  }
  // Emblem: a few overlapping discs near the center.
  const double er = 0.16 * std::min(rx, ry);
  for (int i = 0; i < 3; ++i)
    disc(sm.mask, h, w, cx + uniform(rng, -0.4, 0.4) * er, cy + uniform(rng, -0.4, 0.4) * er, er * uniform(rng, 0.6, 1.0));

  int x0 = static_cast<int>(w), y0 = static_cast<int>(h), x1 = -1, y1 = -1;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      if (sm.mask[y * w + x]) {
        x0 = std::min(x0, static_cast<int>(x));
        y0 = std::min(y0, static_cast<int>(y));
        x1 = std::max(x1, static_cast<int>(x));
        y1 = std::max(y1, static_cast<int>(y));
      }
  sm.box = {x0, y0, x1 + 1, y1 + 1};
  return sm;
}

/// Page with simulated text and one stamp inside the placement region.
inline SynthSample gen_stamp_page(const SynthSpec& spec) {
  using namespace synth_detail;
  spec.validate();
  Rng rng(spec.seed);
  const BoundingBox region = spec.placement_region();

  const double diameter = uniform(rng, spec.diameter_min, spec.diameter_max);
  double rx = 0.5 * diameter, ry = 0.5 * diameter;
  if (spec.shape == StampShape::ellipse) {
    const double squash = uniform(rng, 0.65, 0.85);
    if (uniform(rng, 0.0, 1.0) < 0.5) ry *= squash; else rx *= squash;
  }
  require(2.0 * rx + 2.0 <= region.width() && 2.0 * ry + 2.0 <= region.height(),
          "gen_stamp_page: stamp larger than placement region");
  const double cx = uniform(rng, region.x0 + rx + 1.0, region.x1 - rx - 1.0);
  const double cy = uniform(rng, region.y0 + ry + 1.0, region.y1 - ry - 1.0);

  GrayImage page(spec.page_h, spec.page_w, spec.background);
  text_lines(page, rng, 0, static_cast<int>(spec.page_h), spec.text_density, spec.text_min, spec.text_max);

  const StampMask sm = render_stamp_mask(spec.page_h, spec.page_w, spec.shape, cx, cy, rx, ry, rng);
  const double ink = uniform(rng, spec.ink_min, spec.ink_max);
  composite(page, sm.mask, ink + spec.fade * (spec.background - ink));

  degrade(page, rng, spec.lowres_factor, spec.noise_sigma);
  return {std::move(page), sm.box, 1};
}

/// Non-stamp crop taken from the upper (stamp-free) half of a page.
inline SynthSample gen_negative(const SynthSpec& spec, NegativeKind kind) {
  using namespace synth_detail;
  spec.validate();
  Rng rng(spec.seed);
  const int ph = static_cast<int>(spec.page_h), pw = static_cast<int>(spec.page_w);
  const int ch = std::min(ph / 2, uniform_int(rng, 55, 100));
  const int cw = std::min(pw, uniform_int(rng, 55, 115));

  GrayImage page(spec.page_h, spec.page_w, spec.background);
  if (kind != NegativeKind::background)
    text_lines(page, rng, 0, ph, spec.text_density, spec.text_min, spec.text_max);

  int cy = uniform_int(rng, 0, ph / 2 - ch);
  int cx = uniform_int(rng, 0, pw - cw);
  if (kind == NegativeKind::border) {
    // Dark frame line near the page edge; the crop straddles it.
    const int inset = uniform_int(rng, 4, 10);
    const int thick = uniform_int(rng, 2, 3);
    const double level = uniform(rng, spec.ink_min, spec.ink_max);
    for (int y = inset; y < ph - inset; ++y)
      for (int x = inset; x < pw - inset; ++x) {
        const bool on = y < inset + thick || y >= ph - inset - thick || x < inset + thick || x >= pw - inset - thick;
        if (on) page.at(y, x) = std::min(page.at(y, x), level);
      }
    const int side = uniform_int(rng, 0, 2);  // 0 top, 1 left, 2 right
    if (side == 0) cy = 0;
    else if (side == 1) cx = 0;
    else cx = pw - cw;
  }
  degrade(page, rng, spec.lowres_factor, spec.noise_sigma);
  GrayImage crop_img = crop(page, {cx, cy, cx + cw, cy + ch});
  return {std::move(crop_img), std::nullopt, 0};
}

/// Round to the 8-bit grid, matching a PNG round trip.
inline GrayImage quantize8(const GrayImage& img) {
  GrayImage out = img;
  for (double& v : out.data) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  return out;
}

/// Ranges from which per-sample specs are drawn.
struct DatasetTemplate {
  SynthSpec base;
  double fade_max = 0.5;
  double noise_min = 0.0;
  double noise_max = 0.05;
  double text_density_min = 0.3;
  double text_density_max = 0.9;
  double lowres_probability = 0.2;
};

inline SynthSpec positive_spec(const DatasetTemplate& tpl, std::uint64_t seed) {
  Rng rng(seed);
  SynthSpec s = tpl.base;
  s.shape = static_cast<StampShape>(synth_detail::uniform_int(rng, 0, 2));
  s.fade = synth_detail::uniform(rng, 0.0, tpl.fade_max);
  s.noise_sigma = synth_detail::uniform(rng, tpl.noise_min, tpl.noise_max);
  s.text_density = synth_detail::uniform(rng, tpl.text_density_min, tpl.text_density_max);
  s.lowres_factor = synth_detail::uniform(rng, 0.0, 1.0) < tpl.lowres_probability ? 2 : 1;
  s.seed = rng();
  return s;
}

inline std::pair<SynthSpec, NegativeKind> negative_spec(const DatasetTemplate& tpl, std::uint64_t seed) {
  Rng rng(seed);
  SynthSpec s = tpl.base;
  const double r = synth_detail::uniform(rng, 0.0, 1.0);
  const NegativeKind kind = r < 0.5 ? NegativeKind::text : (r < 0.75 ? NegativeKind::border : NegativeKind::background);
  s.noise_sigma = synth_detail::uniform(rng, tpl.noise_min, tpl.noise_max);
  s.text_density = synth_detail::uniform(rng, tpl.text_density_min, tpl.text_density_max);
  s.lowres_factor = synth_detail::uniform(rng, 0.0, 1.0) < tpl.lowres_probability ? 2 : 1;
  s.seed = rng();
  return {s, kind};
}

/// In-memory dataset: positives first, then negatives, pixel values on the
/// 8-bit grid so they match what `write_dataset` puts on disk.
inline std::vector<SynthSample> gen_samples(std::size_t n_pos, std::size_t n_neg, const DatasetTemplate& tpl,
                                            std::uint64_t rng_seed) {
  require(n_pos >= 1 && n_neg >= 1, "gen_samples: counts must be >= 1");
  std::vector<SynthSample> out;
  out.reserve(n_pos + n_neg);
  for (std::size_t i = 0; i < n_pos; ++i) {
    SynthSample s = gen_stamp_page(positive_spec(tpl, derive_seed(rng_seed, 2 * i)));
    s.page = quantize8(s.page);
    out.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < n_neg; ++i) {
    const auto [spec, kind] = negative_spec(tpl, derive_seed(rng_seed, 2 * i + 1));
    SynthSample s = gen_negative(spec, kind);
    s.page = quantize8(s.page);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace stampfeat
