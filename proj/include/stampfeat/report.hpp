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

#include <cstdio>
#include <span>
#include <sstream>
#include <string>

#include "json.hpp"
#include "stampfeat/pipeline.hpp"

namespace stampfeat {

/// Fixed-width text table with the columns of the published comparison.
inline std::string format_table(std::span<const BenchRow> rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %12s %8s %8s %8s %15s\n", "Method", "# of filters", "Acc.", "Prec.",
                "Recall", "Test time (s)");
  os << line;
  for (const BenchRow& r : rows) {
    std::snprintf(line, sizeof line, "%-18s %12zu %8.2f %8.2f %8.2f %15.4f\n", r.method.c_str(), r.n_filters,
                  r.report.accuracy, r.report.precision, r.report.recall, r.test_time_s());
    os << line;
  }
  return os.str();
}

inline nlohmann::json to_json(const BenchRow& r) {
  return {{"method", r.method},
          {"n_filters", r.n_filters},
          {"accuracy", r.report.accuracy},
          {"precision", r.report.precision},
          {"recall", r.report.recall},
          {"test_time_s", r.test_time_s()},
          {"extract_time_s", r.extract_time_s},
          {"scoring_time_s", r.scoring_time_s}};
}

inline nlohmann::json to_json(std::span<const BenchRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const BenchRow& r : rows) out.push_back(to_json(r));
  return out;
}

inline nlohmann::json to_json(const EvalReport& r) {
  return {{"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall},
          {"test_time_s", r.test_time_seconds}, {"n_test", r.n_test}, {"tp", r.tp},
          {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}};
}

/// Feature rows as CSV, label first (+1 / -1), full double precision.
inline std::string features_csv(const LabeledSet& set) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < set.size(); ++i) {
    os << set.y[i];
    for (double v : set.x[i]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

}  // namespace stampfeat
