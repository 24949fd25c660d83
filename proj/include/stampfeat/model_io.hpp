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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stampfeat/classifier.hpp"
#include "stampfeat/dictionary.hpp"
#include "stampfeat/whitening.hpp"

namespace stampfeat {

inline constexpr char kModelMagic[8] = {'S', 'T', 'M', 'P', 'F', 'E', 'A', 'T'};
inline constexpr std::uint32_t kModelVersion = 1;

/// Everything needed to verify or detect from a saved run.
struct ModelFile {
  std::uint32_t version = kModelVersion;
  std::size_t resize_h = 64;
  std::size_t resize_w = 96;
  std::size_t patch = 16;
  RankedDictionary ranked;  // v == k and identity rank until `rank` runs
  bool is_ranked = false;
  double tau = 0.0;
  std::optional<LinearModel> svm;
  std::uint64_t seed = 0;
  std::uint64_t manifest_hash = 0;
};

namespace model_detail {

// Explicit little-endian encoding so files move between hosts unchanged.
class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const std::string& s) { buf_ += s; }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string& data, std::string what) : data_(data), what_(std::move(what)) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t size_t_field(std::uint64_t limit) {
    const std::uint64_t v = u64();
    if (v > limit) fail("field out of range");
    return static_cast<std::size_t>(v);
  }
  bool done() const { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& why) const { throw IoError("model file: " + what_ + ": " + why); }

 private:
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail("truncated");
  }

  const std::string& data_;
  std::string what_;
  std::size_t pos_ = 0;
};

inline constexpr std::uint64_t kMaxDim = 1u << 20;

}  // namespace model_detail

/// Checks the cross-section dimension contracts; throws IoError.
inline void validate(const ModelFile& mf) {
  auto bad = [](const std::string& why) { throw IoError("model file: " + why); };
  const auto& d = mf.ranked.dict;
  const std::size_t m = mf.patch, dim = m * m;
  if (m == 0 || mf.resize_h < m || mf.resize_w < m) bad("preprocess dimensions inconsistent with patch size");
  if (d.atom_side != m || static_cast<std::size_t>(d.atoms.cols()) != dim) bad("atom length must equal patch^2");
  if (d.k() == 0) bad("empty dictionary");
  const auto& w = mf.ranked.whitening;
  if (static_cast<std::size_t>(w.dim()) != dim || w.matrix.rows() != w.matrix.cols() || w.matrix.rows() != w.dim())
    bad("whitening dimension must equal patch^2");
  const auto& s = mf.ranked.scores;
  if (s.scores.size() != d.k() || s.rank.size() != d.k()) bad("score count must equal k");
  std::vector<bool> seen(d.k(), false);
  for (std::size_t r : s.rank) {
    if (r >= d.k() || seen[r]) bad("rank is not a permutation");
    seen[r] = true;
  }
  if (mf.ranked.v < 1 || mf.ranked.v > d.k()) bad("v out of range");
  if (mf.svm && mf.svm->weights.size() != 16 * mf.ranked.v) bad("svm weight length must equal 16*v");
}

inline std::string serialize(const ModelFile& mf) {
  using model_detail::Writer;
  validate(mf);
  std::map<std::string, std::string> sections;
  {
    Writer w;
    w.u64(mf.resize_h);
    w.u64(mf.resize_w);
    w.u64(mf.patch);
    sections["preprocess"] = w.str();
  }
  {
    Writer w;
    const auto& t = mf.ranked.whitening;
    w.u64(static_cast<std::uint64_t>(t.dim()));
    w.f64(t.epsilon);
    for (Eigen::Index i = 0; i < t.dim(); ++i) w.f64(t.mean(i));
    for (Eigen::Index r = 0; r < t.dim(); ++r)
      for (Eigen::Index c = 0; c < t.dim(); ++c) w.f64(t.matrix(r, c));
    sections["whitening"] = w.str();
  }
  {
    Writer w;
    const auto& d = mf.ranked.dict;
    w.u64(d.k());
    w.u64(d.atom_side);
    for (Eigen::Index r = 0; r < d.atoms.rows(); ++r)
      for (Eigen::Index c = 0; c < d.atoms.cols(); ++c) w.f64(d.atoms(r, c));
    sections["dictionary"] = w.str();
  }
  {
    Writer w;
    const auto& s = mf.ranked.scores;
    w.u64(mf.is_ranked ? 1 : 0);
    w.u64(s.scores.size());
    for (double v : s.scores) w.f64(v);
    for (std::size_t r : s.rank) w.u64(r);
    w.u64(mf.ranked.v);
    w.f64(mf.tau);
    sections["scores"] = w.str();
  }
  if (mf.svm) {
    Writer w;
    w.u64(mf.svm->weights.size());
    w.f64(mf.svm->c);
    w.f64(mf.svm->bias);
    for (double v : mf.svm->weights) w.f64(v);
    sections["svm"] = w.str();
  }
  {
    Writer w;
    w.u64(mf.seed);
    w.u64(mf.manifest_hash);
    sections["provenance"] = w.str();
  }

  Writer out;
  out.bytes(std::string(kModelMagic, 8));
  out.u32(mf.version);
  out.u32(static_cast<std::uint32_t>(sections.size()));
  for (const auto& [name, payload] : sections) {
    out.u32(static_cast<std::uint32_t>(name.size()));
    out.bytes(name);
    out.u64(payload.size());
    out.bytes(payload);
  }
  return out.str();
}

inline ModelFile deserialize(const std::string& data) {
  using model_detail::kMaxDim;
  using model_detail::Reader;
  Reader top(data, "header");
  if (top.bytes(8) != std::string(kModelMagic, 8)) top.fail("bad magic");
  ModelFile mf;
  mf.version = top.u32();
  if (mf.version != kModelVersion) top.fail("unsupported version " + std::to_string(mf.version));
  const std::uint32_t n = top.u32();
  std::map<std::string, std::string> sections;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t len = top.u32();
    if (len > 64) top.fail("section name too long");
    std::string name = top.bytes(len);
    const std::uint64_t size = top.u64();
    if (size > data.size()) top.fail("section larger than file");
    sections[name] = top.bytes(static_cast<std::size_t>(size));
  }
  if (!top.done()) top.fail("trailing bytes");
  for (const char* required : {"preprocess", "whitening", "dictionary", "scores", "provenance"})
    if (!sections.count(required)) top.fail(std::string("missing section ") + required);

  {
    Reader r(sections["preprocess"], "preprocess");
    mf.resize_h = r.size_t_field(kMaxDim);
    mf.resize_w = r.size_t_field(kMaxDim);
    mf.patch = r.size_t_field(1024);
    if (!r.done()) r.fail("trailing bytes");
  }
  {
    Reader r(sections["whitening"], "whitening");
    const std::size_t dim = r.size_t_field(1u << 16);
    auto& t = mf.ranked.whitening;
    t.epsilon = r.f64();
    t.mean.resize(static_cast<Eigen::Index>(dim));
    t.matrix.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) t.mean(i) = r.f64();
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) t.matrix(a, b) = r.f64();
    if (!r.done()) r.fail("trailing bytes");
  }
  {
    Reader r(sections["dictionary"], "dictionary");
    const std::size_t k = r.size_t_field(kMaxDim);
    const std::size_t side = r.size_t_field(1024);
    auto& d = mf.ranked.dict;
    d.atom_side = side;
    d.atoms.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(side * side));
    for (Eigen::Index a = 0; a < d.atoms.rows(); ++a)
      for (Eigen::Index b = 0; b < d.atoms.cols(); ++b) d.atoms(a, b) = r.f64();
    if (!r.done()) r.fail("trailing bytes");
  }
  {
    Reader r(sections["scores"], "scores");
    mf.is_ranked = r.u64() != 0;
    const std::size_t k = r.size_t_field(kMaxDim);
    auto& s = mf.ranked.scores;
    s.scores.resize(k);
    s.rank.resize(k);
    for (double& v : s.scores) v = r.f64();
    for (std::size_t& v : s.rank) v = r.size_t_field(kMaxDim);
    mf.ranked.v = r.size_t_field(kMaxDim);
    mf.tau = r.f64();
    if (!r.done()) r.fail("trailing bytes");
  }
  if (sections.count("svm")) {
    Reader r(sections["svm"], "svm");
    LinearModel lm;
    const std::size_t dim = r.size_t_field(kMaxDim);
    lm.c = r.f64();
    lm.bias = r.f64();
    lm.weights.resize(dim);
    for (double& v : lm.weights) v = r.f64();
    if (!r.done()) r.fail("trailing bytes");
    mf.svm = std::move(lm);
  }
  {
    Reader r(sections["provenance"], "provenance");
    mf.seed = r.u64();
    mf.manifest_hash = r.u64();
    if (!r.done()) r.fail("trailing bytes");
  }
  validate(mf);
  return mf;
}

/// Writes to a sibling temp file, then renames over the target, so a failed
/// save never leaves a half-written model behind.
inline void save_model(const std::filesystem::path& path, const ModelFile& mf) {
  const std::string bytes = serialize(mf);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw IoError("cannot write model: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename model into place: " + ec.message());
  }
}

inline ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace stampfeat
