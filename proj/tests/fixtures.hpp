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


// A small learned dictionary shared by tests that need realistic filters.
#pragma once

#include "stampfeat/pipeline.hpp"
#include "stampfeat/synth.hpp"

namespace fixture {

using namespace stampfeat;

inline const RankedDictionary& learned() {
  static const RankedDictionary rd = [] {
    PipelineConfig cfg;
    cfg.k = 32;
    cfg.ranking_images = 5;
    const auto samples = gen_samples(60, 1, DatasetTemplate{}, 21);
    std::vector<GrayImage> stamps;
    for (std::size_t i = 0; i < 60; ++i)
      stamps.push_back(verification_input({samples[i].page, samples[i].stamp_box, 1}, cfg, i));
    return rank_dictionary(learn_dictionary(stamps, cfg), stamps, cfg);
  }();
  return rd;
}

}  // namespace fixture
