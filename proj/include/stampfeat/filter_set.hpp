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

#include <vector>

#include "stampfeat/imaging.hpp"

namespace stampfeat {

/// Correlation kernels in raw pixel space, each with an additive offset.
///
/// response_j = xcorr(image, kernels[j]) + offsets[j]. Learned atoms reach
/// this form through `composed_filters`; fixed banks carry zero offsets.
struct FilterSet {
  std::size_t side = 0;
  std::vector<Patch> kernels;
  std::vector<double> offsets;

  std::size_t size() const { return kernels.size(); }
};

inline ResponseMap filter_response(const GrayImage& img, const FilterSet& filters, std::size_t j) {
  ResponseMap r = xcorr_valid(img, filters.kernels[j]);
  const double off = filters.offsets[j];
  if (off != 0.0)
    for (double& v : r.data) v += off;
  return r;
}

inline std::vector<ResponseMap> filter_responses(const GrayImage& img, const FilterSet& filters) {
  require(filters.size() > 0, "filter_responses: empty filter set");
  require(filters.offsets.size() == filters.size(), "filter_responses: offsets/kernels size mismatch");
  require(filters.side <= img.height && filters.side <= img.width, "filter_responses: image smaller than filters");
  std::vector<ResponseMap> out;
  out.reserve(filters.size());
  for (std::size_t j = 0; j < filters.size(); ++j) out.push_back(filter_response(img, filters, j));
  return out;
}

}  // namespace stampfeat
