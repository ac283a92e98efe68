/* Copyright 2026 The Seafuse Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "seafuse/model.h"

namespace seafuse {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoints are read and written as little-endian");

constexpr char kMagic[8] = {'S', 'F', 'C', 'K', 'P', 'T', '\0', '\1'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error(path.string() + ": cannot open");
  }
  void Bytes(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void U32(uint32_t v) { Bytes(&v, sizeof(v)); }
  void Finish() {
    out_.flush();
    if (!out_) throw std::runtime_error(path_.string() + ": write failed");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error(path.string() + ": cannot open");
  }
  void Bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) Fail("truncated checkpoint");
  }
  uint32_t U32() {
    uint32_t v;
    Bytes(&v, sizeof(v));
    return v;
  }
  [[noreturn]] void Fail(const std::string& what) const {
    throw std::runtime_error(path_.string() + ": " + what);
  }
  bool AtEnd() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const Params& params) {
  const ModelConfig& cfg = params.config();
  Writer w(path);
  w.Bytes(kMagic, sizeof(kMagic));
  w.U32(kVersion);
  w.U32(static_cast<uint32_t>(cfg.stages()));
  for (int c : cfg.channels) w.U32(static_cast<uint32_t>(c));
  w.U32(static_cast<uint32_t>(cfg.classes));
  w.U32(static_cast<uint32_t>(cfg.height));
  w.U32(static_cast<uint32_t>(cfg.width));
  w.U32(cfg.multihead ? 1 : 0);
  w.U32(static_cast<uint32_t>(params.count()));
  for (size_t i = 0; i < params.count(); ++i) {
    const std::string& name = params.name(i);
    const Tensor& t = params.tensor(i);
    w.U32(static_cast<uint32_t>(name.size()));
    w.Bytes(name.data(), name.size());
    w.U32(static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) w.U32(static_cast<uint32_t>(d));
    w.Bytes(t.values.data(), t.values.size() * sizeof(double));
  }
  w.Finish();
}

Params LoadCheckpoint(const std::filesystem::path& path) {
  Reader r(path);
  char magic[sizeof(kMagic)];
  r.Bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    r.Fail("not a checkpoint file");
  }
  if (const uint32_t version = r.U32(); version != kVersion) {
    r.Fail("unsupported checkpoint version " + std::to_string(version));
  }
  ModelConfig cfg;
  const uint32_t stages = r.U32();
  if (stages == 0 || stages > 16) r.Fail("implausible stage count");
  cfg.channels.resize(stages);
  for (int& c : cfg.channels) c = static_cast<int>(r.U32());
  cfg.classes = static_cast<int>(r.U32());
  cfg.height = static_cast<int>(r.U32());
  cfg.width = static_cast<int>(r.U32());
  cfg.multihead = r.U32() != 0;

  Params params;
  try {
    params = Params(cfg);
  } catch (const std::invalid_argument& e) {
    r.Fail(std::string("invalid model config: ") + e.what());
  }
  const uint32_t count = r.U32();
  if (count != params.count()) {
    r.Fail("expected " + std::to_string(params.count()) + " tensors, found " +
           std::to_string(count));
  }
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = r.U32();
    if (name_len > 256) r.Fail("implausible tensor name length");
    std::string name(name_len, '\0');
    r.Bytes(name.data(), name_len);
    if (name != params.name(i)) {
      r.Fail("tensor " + std::to_string(i) + " is '" + name + "', expected '" +
             params.name(i) + "'");
    }
    Tensor& t = params.tensor(i);
    const uint32_t rank = r.U32();
    if (rank != t.shape.size()) r.Fail("rank mismatch for '" + name + "'");
    for (int d : t.shape) {
      if (r.U32() != static_cast<uint32_t>(d)) {
        r.Fail("shape mismatch for '" + name + "'");
      }
    }
    r.Bytes(t.values.data(), t.values.size() * sizeof(double));
  }
  if (!r.AtEnd()) r.Fail("trailing bytes after the last tensor");
  return params;
}

}  // namespace seafuse
