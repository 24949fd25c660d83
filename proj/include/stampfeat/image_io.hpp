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
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "stampfeat/imaging.hpp"

namespace stampfeat {

/// Reads PNG/PGM (or anything imgcodecs understands). Color input goes
/// through to_grayscale; gray input is scaled by 1/255 (or 1/65535).
inline GrayImage read_gray(const std::string& path) {
  const cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) throw IoError("cannot read image: " + path);
  const double full = m.depth() == CV_16U ? 65535.0 : 255.0;
  if (m.channels() == 1) {
    GrayImage out(m.rows, m.cols);
    cv::Mat f;
    m.convertTo(f, CV_64F);
    // Divide, not multiply by the reciprocal: v/255 matches quantize8 exactly.
    for (int y = 0; y < f.rows; ++y)
      for (int x = 0; x < f.cols; ++x) out.at(y, x) = std::clamp(f.at<double>(y, x) / full, 0.0, 1.0);
    return out;
  }
  cv::Mat rgb8;
  if (m.depth() != CV_8U)
    m.convertTo(rgb8, CV_8U, 255.0 / full);
  else
    rgb8 = m;
  const int ch = rgb8.channels();
  RgbImage img(rgb8.rows, rgb8.cols);
  for (int y = 0; y < rgb8.rows; ++y) {
    const auto* row = rgb8.ptr<std::uint8_t>(y);
    for (int x = 0; x < rgb8.cols; ++x) {
      std::uint8_t* p = &img.data[3 * (static_cast<std::size_t>(y) * img.width + x)];
      p[0] = row[ch * x + 2];  // stored as BGR(A)
      p[1] = row[ch * x + 1];
      p[2] = row[ch * x];
    }
  }
  return to_grayscale(img);
}

inline void write_png(const std::string& path, const GrayImage& img) {
  cv::Mat m(static_cast<int>(img.height), static_cast<int>(img.width), CV_8UC1);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      m.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(std::lround(std::clamp(img.at(y, x), 0.0, 1.0) * 255.0));
  if (!cv::imwrite(path, m)) throw IoError("cannot write image: " + path);
}

inline void write_png(const std::string& path, const RgbImage& img) {
  cv::Mat m(static_cast<int>(img.height), static_cast<int>(img.width), CV_8UC3);
  for (std::size_t y = 0; y < img.height; ++y) {
    auto* row = m.ptr<std::uint8_t>(static_cast<int>(y));
    for (std::size_t x = 0; x < img.width; ++x) {
      const std::uint8_t* p = &img.data[3 * (y * img.width + x)];
      row[3 * x] = p[2];  // imgcodecs wants BGR
      row[3 * x + 1] = p[1];
      row[3 * x + 2] = p[0];
    }
  }
  if (!cv::imwrite(path, m)) throw IoError("cannot write image: " + path);
}

/// Gray page promoted to RGB so boxes can be drawn in color.
inline RgbImage to_rgb(const GrayImage& img) {
  RgbImage out(img.height, img.width);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(std::lround(std::clamp(img.data[i], 0.0, 1.0) * 255.0));
    out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = v;
  }
  return out;
}

/// One-pixel rectangle outline, clipped to the image.
inline void draw_box(RgbImage& img, const BoundingBox& b, std::uint8_t r, std::uint8_t g, std::uint8_t bl) {
  if (!b.valid()) return;
  const int h = static_cast<int>(img.height), w = static_cast<int>(img.width);
  auto put = [&](int y, int x) {
    if (y < 0 || x < 0 || y >= h || x >= w) return;
    std::uint8_t* p = &img.data[3 * (static_cast<std::size_t>(y) * img.width + x)];
    p[0] = r;
    p[1] = g;
    p[2] = bl;
  };
  for (int x = b.x0; x < b.x1; ++x) {
    put(b.y0, x);
    put(b.y1 - 1, x);
  }
  for (int y = b.y0; y < b.y1; ++y) {
    put(y, b.x0);
    put(y, b.x1 - 1);
  }
}

}  // namespace stampfeat
