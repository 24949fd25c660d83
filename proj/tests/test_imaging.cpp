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

#include <set>

#include "oracles.hpp"
#include "stampfeat/imaging.hpp"

using namespace stampfeat;

TEST(Grayscale, LumaWeights) {
  RgbImage rgb(1, 3);
  rgb.data = {255, 255, 255, 0, 0, 0, 255, 0, 0};
  const GrayImage g = to_grayscale(rgb);
  EXPECT_DOUBLE_EQ(g.data[0], 1.0);
  EXPECT_DOUBLE_EQ(g.data[1], 0.0);
  EXPECT_NEAR(g.data[2], 0.299, 1e-15);
}

TEST(Grayscale, EmptyImageRejected) { EXPECT_THROW(to_grayscale(RgbImage{}), InvalidInput); }

TEST(Resize, IdentityAndConstant) {
  const GrayImage img = oracle::random_image(7, 9, 1);
  EXPECT_EQ(resize(img, 7, 9), img);
  const GrayImage c(5, 6, 0.37);
  for (auto [h, w] : {std::pair{1, 1}, {3, 11}, {64, 96}}) {
    const GrayImage r = resize(c, h, w);
    ASSERT_EQ(r.height, std::size_t(h));
    ASSERT_EQ(r.width, std::size_t(w));
    for (double v : r.data) EXPECT_NEAR(v, 0.37, 1e-15);
  }
}

TEST(Resize, RowsStayMonotone) {
  GrayImage img(2, 2);
  img.data = {0, 1, 0, 1};
  const GrayImage r = resize(img, 2, 4);
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t x = 1; x < 4; ++x) EXPECT_LE(r.at(y, x - 1), r.at(y, x));
}

TEST(Resize, StaysInUnitRange) {
  const GrayImage img = oracle::random_image(30, 17, 2);
  for (double v : resize(img, 64, 96).data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_THROW(resize(img, 0, 5), InvalidInput);
}

TEST(Normalize, Examples) {
  GrayImage a(1, 2);
  a.data = {0.2, 0.7};
  const GrayImage n = normalize(a);
  EXPECT_DOUBLE_EQ(n.data[0], 0.0);
  EXPECT_DOUBLE_EQ(n.data[1], 1.0);
  for (double v : normalize(GrayImage(3, 3, 0.5)).data) EXPECT_EQ(v, 0.0);
  GrayImage s = oracle::random_image(4, 4, 3);
  s.data[0] = 0.0;
  s.data[5] = 1.0;
  EXPECT_EQ(normalize(s), s);
}

TEST(Normalize, Idempotent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GrayImage img = oracle::random_image(6, 8, seed);
    for (double& v : img.data) v = 0.3 + 0.2 * v;
    const GrayImage once = normalize(img);
    EXPECT_EQ(normalize(once), once);
  }
}

TEST(SamplePatches, FullSizePatchIsTheImage) {
  const GrayImage img = oracle::random_image(8, 8, 4);
  for (const Patch& p : sample_patches(img, 8, 5, 11)) EXPECT_EQ(p.data, img.data);
}

TEST(SamplePatches, Deterministic) {
  const GrayImage img = oracle::random_image(20, 30, 5);
  EXPECT_EQ(sample_patches(img, 5, 50, 9), sample_patches(img, 5, 50, 9));
  EXPECT_NE(sample_patches(img, 5, 50, 9), sample_patches(img, 5, 50, 10));
}

TEST(SamplePatches, CoversTheValidGrid) {
  // Positions are recovered by matching each patch against a ramp image
  // whose pixel values encode their coordinates.
  GrayImage img(64, 96);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 0; x < 96; ++x) img.at(y, x) = static_cast<double>(y * 96 + x);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Patch& p : sample_patches(img, 16, 1000, 7)) {
    const auto v = static_cast<std::size_t>(p.data[0]);
    seen.insert({v / 96, v % 96});
  }
  const double covered = static_cast<double>(seen.size()) / (49.0 * 81.0);
  // 1000 draws over 3969 cells cannot reach 90%; the expected distinct count
  // is 3969 * (1 - (1 - 1/3969)^1000) ~ 881, i.e. ~22%.
  EXPECT_GT(covered, 0.20);
  EXPECT_LT(covered, 0.25);
  std::set<std::size_t> rows, cols;
  for (auto [y, x] : seen) {
    EXPECT_LE(y, 48u);
    EXPECT_LE(x, 80u);
    rows.insert(y);
    cols.insert(x);
  }
  // Per axis the sampler does reach the whole valid range.
  EXPECT_GE(rows.size(), std::size_t(0.9 * 49));
  EXPECT_GE(cols.size(), std::size_t(0.9 * 81));
}

TEST(SamplePatches, CoverageGrowsToTheWholeGrid) {
  GrayImage img(64, 96);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = static_cast<double>(i);
  std::set<std::size_t> seen;
  for (const Patch& p : sample_patches(img, 16, 20000, 7)) seen.insert(static_cast<std::size_t>(p.data[0]));
  EXPECT_GE(seen.size(), std::size_t(0.9 * 49 * 81));
}

TEST(SamplePatches, RejectsOversizedPatch) {
  EXPECT_THROW(sample_patches(GrayImage(10, 10), 11, 1, 0), InvalidInput);
  EXPECT_THROW(sample_patches(GrayImage(10, 10), 3, 0, 0), InvalidInput);
}

TEST(DensePatches, CountsAndCenters) {
  EXPECT_EQ(dense_patches(GrayImage(16, 16), 16).size(), 1u);
  EXPECT_EQ(dense_patches(GrayImage(18, 18), 16).size(), 9u);
  for (const auto& dp : dense_patches(GrayImage(10, 12, 1.0), 4)) EXPECT_EQ(dp.center_intensity, 1.0);
  const GrayImage img = oracle::random_image(9, 13, 6);
  const auto dps = dense_patches(img, 5);
  ASSERT_EQ(dps.size(), (9u - 5 + 1) * (13u - 5 + 1));
  for (std::size_t i = 0; i < dps.size(); ++i) {
    EXPECT_EQ(dps[i].y, i / 9);
    EXPECT_EQ(dps[i].x, i % 9);
    EXPECT_EQ(dps[i].center_intensity, img.at(dps[i].y + 2, dps[i].x + 2));
  }
  EXPECT_THROW(dense_patches(img, 10), InvalidInput);
}

TEST(Xcorr, HandExample) {
  GrayImage img(2, 2);
  img.data = {1, 2, 3, 4};
  const ResponseMap r = xcorr_valid(img, Patch(2, {1, 0, 0, 1}));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r.data[0], 5.0);
}

TEST(Xcorr, DeltaAndZeroKernels) {
  const GrayImage img = oracle::random_image(10, 11, 8);
  Patch delta(3);
  delta.at(1, 2) = 1.0;
  const ResponseMap r = xcorr_valid(img, delta);
  for (std::size_t y = 0; y < r.height; ++y)
    for (std::size_t x = 0; x < r.width; ++x) EXPECT_EQ(r.at(y, x), img.at(y + 1, x + 2));
  for (double v : xcorr_valid(img, Patch(3)).data) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(xcorr_valid(img, Patch(12)), InvalidInput);
}

TEST(Xcorr, MatchesDensePatchDotProducts) {
  // Sides cover the unrolled and remainder paths of the inner loop.
  for (std::size_t m : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 16u}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const GrayImage img = oracle::random_image(20, 23, 100 * m + seed);
      const Patch k = oracle::random_patch(m, 7 * m + seed);
      const ResponseMap r = xcorr_valid(img, k);
      const auto dps = dense_patches(img, m);
      ASSERT_EQ(r.size(), dps.size());
      for (std::size_t i = 0; i < dps.size(); ++i) {
        double dot = 0.0;
        for (std::size_t t = 0; t < k.data.size(); ++t) dot += k.data[t] * dps[i].patch.data[t];
        EXPECT_NEAR(r.data[i], dot, 1e-10);
      }
    }
  }
}

TEST(Crop, ClipsToImage) {
  const GrayImage img = oracle::random_image(10, 10, 9);
  const GrayImage c = crop(img, {-3, 8, 4, 20});
  EXPECT_EQ(c.height, 2u);
  EXPECT_EQ(c.width, 4u);
  EXPECT_EQ(c.at(1, 3), img.at(9, 3));
  EXPECT_THROW(crop(img, {20, 20, 30, 30}), InvalidInput);
}

TEST(PatchType, LengthChecked) { EXPECT_THROW(Patch(3, std::vector<double>(8)), InvalidInput); }
