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


#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stampfeat/detector.hpp"

using namespace stampfeat;

namespace {

ResponseMap map_of(std::size_t h, std::size_t w, std::initializer_list<double> v) {
  ResponseMap m(h, w);
  m.data.assign(v);
  return m;
}

SynthSpec clean_page(std::uint64_t seed) {
  SynthSpec s;
  s.noise_sigma = 0.0;
  s.seed = seed;
  return s;
}

// Shift page content by (dy, dx), filling with the page background.
GrayImage shifted(const GrayImage& page, int dy, int dx, double fill) {
  GrayImage out(page.height, page.width, fill);
  for (int y = 0; y < static_cast<int>(page.height); ++y)
    for (int x = 0; x < static_cast<int>(page.width); ++x) {
      const int sy = y - dy, sx = x - dx;
      if (sy >= 0 && sx >= 0 && sy < static_cast<int>(page.height) && sx < static_cast<int>(page.width))
        out.at(y, x) = page.at(sy, sx);
    }
  return out;
}

}  // namespace

TEST(ResponseMap, WhiteImageIsZero) {
  const FilterSet fs = composed_filters(fixture::learned());
  for (double v : response_map(GrayImage(40, 40, 1.0), fs).data) EXPECT_EQ(v, 0.0);
}

TEST(ResponseMap, SingleFilterEqualsEquationOne) {
  const RankedDictionary& rd = fixture::learned();
  const GrayImage img = oracle::random_image(30, 35, 4);
  const std::size_t j = rd.scores.rank[0];
  const auto eq1 = atom_responses(rd.dict, rd.whitening, img, std::vector<std::size_t>{j});
  const ResponseMap m = response_map(img, compose_filters(rd.dict, rd.whitening, std::vector<std::size_t>{j}));
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(m.data[i], eq1[0].data[i], 1e-12);
}

TEST(ResponseMap, NonNegativeAndAverageOfFilters) {
  const RankedDictionary& rd = fixture::learned();
  const GrayImage img = oracle::random_image(30, 35, 5);
  const ResponseMap m = response_map(img, rd);
  const auto maps = atom_responses(rd.dict, rd.whitening, img, rd.selected());
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_GE(m.data[i], 0.0);
    double avg = 0.0;
    for (const auto& r : maps) avg += r.data[i];
    EXPECT_NEAR(m.data[i], avg / static_cast<double>(maps.size()), 1e-10);
  }
  EXPECT_THROW(response_map(GrayImage(8, 8), rd), InvalidInput);
}

TEST(ResponseMap, ArgmaxInsideStamp) {
  const FilterSet fs = composed_filters(fixture::learned());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthSpec spec = clean_page(seed);
    spec.text_density = 0.0;
    const SynthSample s = gen_stamp_page(spec);
    const ResponseMap m = response_map(detection_input(s.page), fs);
    const auto it = std::max_element(m.data.begin(), m.data.end());
    const std::size_t i = static_cast<std::size_t>(it - m.data.begin());
    const int y = static_cast<int>(i / m.width + fs.side / 2), x = static_cast<int>(i % m.width + fs.side / 2);
    EXPECT_GE(x, s.stamp_box->x0);
    EXPECT_LT(x, s.stamp_box->x1);
    EXPECT_GE(y, s.stamp_box->y0);
    EXPECT_LT(y, s.stamp_box->y1);
  }
}

TEST(LocateWindow, Examples) {
  const WindowHit h = locate_window(map_of(3, 3, {1, 1, 0, 1, 1, 0, 0, 0, 0}), 2, 2);
  EXPECT_EQ(h.y, 0u);
  EXPECT_EQ(h.x, 0u);
  EXPECT_EQ(h.sum, 4.0);
  const WindowHit u = locate_window(ResponseMap(6, 7, 0.3), 2, 3);
  EXPECT_EQ(u.y, 0u);
  EXPECT_EQ(u.x, 0u);
  EXPECT_THROW(locate_window(ResponseMap(3, 3), 4, 1), InvalidInput);
}

TEST(LocateWindow, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> dim(5, 40);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GrayImage map = oracle::random_image(dim(rng), dim(rng), seed);
    // Some maps are sparse, like rectified responses.
    if (seed % 2)
      for (double& v : map.data) v = v < 0.8 ? 0.0 : v;
    std::uniform_int_distribution<std::size_t> wh(1, map.height), ww(1, map.width);
    const std::size_t h = wh(rng), w = ww(rng);
    const WindowHit hit = locate_window(map, h, w);
    const auto best = oracle::brute_window(map, h, w);
    EXPECT_EQ(hit.y, best.y) << "seed " << seed;
    EXPECT_EQ(hit.x, best.x) << "seed " << seed;
    EXPECT_NEAR(hit.sum, best.sum, 1e-9);
  }
}

TEST(LocateWindow, IntegerMapsTieToTopLeft) {
  // Small integers sum exactly, so every tie is a true tie.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> v(0, 2);
  for (int trial = 0; trial < 50; ++trial) {
    ResponseMap m(9, 11);
    for (double& x : m.data) x = v(rng);
    const WindowHit hit = locate_window(m, 3, 4);
    const auto best = oracle::brute_window(m, 3, 4);
    EXPECT_EQ(hit.y, best.y);
    EXPECT_EQ(hit.x, best.x);
    EXPECT_EQ(hit.sum, best.sum);
  }
}

TEST(RefineBox, Examples) {
  ResponseMap m(10, 10);
  m.at(4, 6) = 2.0;
  const BoundingBox single = refine_box(m, {2, 3, 0.0}, 5, 5, 0.3, 4);
  EXPECT_EQ(single, (BoundingBox{8, 6, 9, 7}));

  const BoundingBox uniform = refine_box(ResponseMap(10, 10, 1.0), {1, 2, 0.0}, 4, 5, 0.5, 0);
  EXPECT_EQ(uniform, (BoundingBox{2, 1, 7, 5}));

  ResponseMap corners(10, 10);
  corners.at(1, 1) = 1.0;
  corners.at(5, 7) = 0.8;
  EXPECT_EQ(refine_box(corners, {1, 1, 0.0}, 5, 7, 0.5, 0), (BoundingBox{1, 1, 8, 6}));
  EXPECT_EQ(refine_box(corners, {1, 1, 0.0}, 5, 7, 0.9, 0), (BoundingBox{1, 1, 2, 2}));

  // Nothing positive in the window: the window itself.
  EXPECT_EQ(refine_box(ResponseMap(6, 6), {1, 1, 0.0}, 2, 3, 0.3, 2), (BoundingBox{2, 2, 5, 4}));
}

TEST(Iou, ExamplesAndProperties) {
  const BoundingBox a{0, 0, 10, 10}, b{5, 0, 15, 10};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {20, 20, 30, 30}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, b), 1.0 / 3.0);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> c(0, 20);
  for (int t = 0; t < 200; ++t) {
    int x0 = c(rng), y0 = c(rng), x1 = x0 + 1 + c(rng), y1 = y0 + 1 + c(rng);
    int u0 = c(rng), v0 = c(rng), u1 = u0 + 1 + c(rng), v1 = v0 + 1 + c(rng);
    const BoundingBox p{x0, y0, x1, y1}, q{u0, v0, u1, v1};
    const double r = iou(p, q);
    EXPECT_EQ(r, iou(q, p));
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    EXPECT_EQ(r == 1.0, p == q);
  }
}

TEST(Detect, BlankPageReportsNoStamp) {
  const DetectionResult d = detect(detection_input(GrayImage(300, 200, 1.0)), fixture::learned());
  EXPECT_EQ(d.response_peak, 0.0);
  EXPECT_FALSE(d.found());
  EXPECT_EQ(d.window_y, 0u);
  EXPECT_EQ(d.window_x, 0u);
  EXPECT_TRUE(d.box.inside(300, 200));
}

TEST(Detect, WindowSizedToTheStamp) {
  const FilterSet fs = composed_filters(fixture::learned());
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SynthSample s = gen_stamp_page(clean_page(seed));
    DetectParams p;
    p.window_frac_h = static_cast<double>(s.stamp_box->height()) / s.page.height;
    p.window_frac_w = static_cast<double>(s.stamp_box->width()) / s.page.width;
    const double v = iou(detect(detection_input(s.page), fs, p).box, *s.stamp_box);
    total += v;
  }
  EXPECT_GE(total / 10.0, 0.8);
}

TEST(Detect, BoxStaysInsidePage) {
  const FilterSet fs = composed_filters(fixture::learned());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.seed = 100 + seed;
    const SynthSample s = gen_stamp_page(spec);
    const DetectionResult d = detect(detection_input(s.page), fs);
    EXPECT_TRUE(d.box.inside(s.page.height, s.page.width));
    EXPECT_GE(d.response_peak, 0.0);
  }
}

TEST(Detect, TranslationConsistent) {
  const FilterSet fs = composed_filters(fixture::learned());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthSpec spec = clean_page(seed);
    spec.placement = BoundingBox{20, 150, 180, 280};
    spec.diameter_max = 70;
    const SynthSample s = gen_stamp_page(spec);
    const int dy = -10 + static_cast<int>(seed) * 4, dx = 8 - static_cast<int>(seed) * 4;
    const DetectionResult a = detect(detection_input(s.page), fs);
    const DetectionResult b = detect(detection_input(shifted(s.page, dy, dx, spec.background)), fs);
    EXPECT_NEAR(b.box.center_x() - a.box.center_x(), dx, fs.side / 2.0) << "seed " << seed;
    EXPECT_NEAR(b.box.center_y() - a.box.center_y(), dy, fs.side / 2.0) << "seed " << seed;
  }
}

TEST(Detect, LowerHalfFlagSuppressesTheTop) {
  const FilterSet fs = composed_filters(fixture::learned());
  SynthSpec spec = clean_page(3);
  spec.placement = BoundingBox{0, 0, 200, 150};
  const SynthSample s = gen_stamp_page(spec);
  DetectParams p;
  p.lower_half_only = true;
  const DetectionResult d = detect(detection_input(s.page), fs, p);
  EXPECT_GE(d.box.center_y(), 150.0 - fs.side);
  EXPECT_THROW(detect(s.page, fs, DetectParams{0.45, 0.55, 1.0, false, 0.0}), InvalidInput);
}
