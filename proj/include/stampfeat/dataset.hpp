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
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stampfeat/image_io.hpp"
#include "stampfeat/pipeline.hpp"
#include "stampfeat/synth.hpp"

namespace stampfeat {

/// One manifest line: `path,label,x0,y0,x1,y1`, box fields empty for
/// non-stamps. Paths are relative to the manifest's directory.
struct ManifestRow {
  std::string path;
  int label = 0;
  std::optional<BoundingBox> box;
};

struct Manifest {
  std::filesystem::path root;  // directory holding the manifest
  std::vector<ManifestRow> rows;
  std::uint64_t hash = 0;  // FNV-1a of the file bytes
};

inline constexpr const char* kManifestHeader = "path,label,x0,y0,x1,y1";

inline std::string format_manifest_row(const ManifestRow& r) {
  std::ostringstream os;
  os << r.path << ',' << r.label << ',';
  if (r.box) os << r.box->x0 << ',' << r.box->y0 << ',' << r.box->x1 << ',' << r.box->y1;
  else os << ",,,";
  return os.str();
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(where + ": not an integer: '" + s + "'");
  }
}

}  // namespace detail

inline Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  Manifest m;
  m.root = path.parent_path();
  m.hash = fnv1a(text);
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == kManifestHeader) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto cells = detail::split_csv(line);
    if (cells.size() != 6) throw IoError(where + ": expected 6 fields");
    ManifestRow r;
    r.path = cells[0];
    r.label = detail::parse_int(cells[1], where);
    if (r.label != 0 && r.label != 1) throw IoError(where + ": label must be 0 or 1");
    const bool any_box = !(cells[2].empty() && cells[3].empty() && cells[4].empty() && cells[5].empty());
    if (any_box) {
      r.box = BoundingBox{detail::parse_int(cells[2], where), detail::parse_int(cells[3], where),
                          detail::parse_int(cells[4], where), detail::parse_int(cells[5], where)};
      if (!r.box->valid()) throw IoError(where + ": degenerate box");
    }
    if (r.label == 1 && !r.box) throw IoError(where + ": stamp row without a box");
    m.rows.push_back(std::move(r));
  }
  if (m.rows.empty()) throw IoError("manifest has no rows: " + path.string());
  return m;
}

inline LabeledImage load_item(const Manifest& m, const ManifestRow& r) {
  LabeledImage item;
  item.image = read_gray((m.root / r.path).string());
  item.box = r.box;
  item.label = r.label;
  if (item.box && !item.box->inside(item.image.height, item.image.width))
    throw IoError("box outside image: " + r.path);
  return item;
}

inline std::vector<LabeledImage> load_items(const Manifest& m) {
  std::vector<LabeledImage> out;
  out.reserve(m.rows.size());
  for (const auto& r : m.rows) out.push_back(load_item(m, r));
  return out;
}

inline std::vector<LabeledImage> to_items(std::vector<SynthSample> samples) {
  std::vector<LabeledImage> out;
  out.reserve(samples.size());
  for (auto& s : samples) out.push_back({std::move(s.page), s.stamp_box, s.label});
  return out;
}

/// Writes pos_NNNN.png / neg_NNNN.png plus manifest.csv into `dir` and
/// returns the manifest path.
inline std::filesystem::path write_dataset(const std::filesystem::path& dir, std::span<const SynthSample> samples) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  std::ostringstream csv;
  csv << kManifestHeader << '\n';
  std::size_t n_pos = 0, n_neg = 0;
  char name[32];
  for (const SynthSample& s : samples) {
    if (s.label == 1) std::snprintf(name, sizeof name, "pos_%04zu.png", n_pos++);
    else std::snprintf(name, sizeof name, "neg_%04zu.png", n_neg++);
    write_png((dir / name).string(), s.page);
    csv << format_manifest_row({name, s.label, s.stamp_box}) << '\n';
  }
  const std::filesystem::path mpath = dir / "manifest.csv";
  std::ofstream out(mpath, std::ios::binary);
  out << csv.str();
  if (!out) throw IoError("cannot write manifest: " + mpath.string());
  return mpath;
}

inline std::filesystem::path gen_dataset(std::size_t n_pos, std::size_t n_neg, const DatasetTemplate& tpl,
                                         std::uint64_t rng_seed, const std::filesystem::path& dir) {
  const auto samples = gen_samples(n_pos, n_neg, tpl, rng_seed);
  return write_dataset(dir, samples);
}

}  // namespace stampfeat
