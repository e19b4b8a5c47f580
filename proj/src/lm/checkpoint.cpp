// Copyright 2026 The sdlab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "sdlab/lm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "sdlab/errors.hpp"

namespace sdlab {
namespace {

constexpr char kMagic[8] = {'S', 'D', 'L', 'A', 'B', 'C', 'K', 'P'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double d) { u64(std::bit_cast<std::uint64_t>(d)); }
  void f64s(std::span<const double> xs) {
    for (double x : xs) f64(x);
  }

 private:
  void le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  void f64s(std::span<double> xs) {
    for (double& x : xs) x = f64();
  }
  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (!in_) throw ParseError("checkpoint truncated");
  }

 private:
  std::uint64_t le(int n) {
    unsigned char buf[8];
    bytes(reinterpret_cast<char*>(buf), static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = n; i-- > 0;) v = (v << 8) | buf[i];
    return v;
  }
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const LanguageModel& model, std::ostream& out) {
  Writer w(out);
  out.write(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(model.family()));
  w.u64(model.vocab().size);
  w.u32(model.vocab().bos_id);
  w.u32(model.vocab().eos_id);
  if (model.family() == ModelFamily::kNGram) {
    const auto& m = static_cast<const NGramLogitLM&>(model);
    const auto keys = m.sorted_keys();
    w.u64(m.order());
    w.u64(keys.size());
    for (std::uint64_t key : keys) {
      w.u64(key);
      w.f64s(m.row(key));
    }
  } else {
    const auto& m = static_cast<const TinyNeuralLM&>(model);
    w.u64(m.shape().context);
    w.u64(m.shape().embed);
    w.u64(m.shape().hidden);
    for (const auto& p : m.params().named()) {
      w.u64(p.values.size());
      w.f64s(p.values);
    }
  }
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

void save_checkpoint(const LanguageModel& model,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  save_checkpoint(model, out);
}

std::unique_ptr<LanguageModel> load_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " +
                     std::to_string(version));
  }
  const std::uint32_t family = r.u32();
  const std::uint64_t vsize = r.u64();
  const std::uint32_t bos = r.u32();
  const std::uint32_t eos = r.u32();
  const Vocab vocab = Vocab::make(vsize, bos, eos);

  if (family == static_cast<std::uint32_t>(ModelFamily::kNGram)) {
    const std::uint64_t order = r.u64();
    auto m = std::make_unique<NGramLogitLM>(vocab, order);
    const std::uint64_t rows = r.u64();
    for (std::uint64_t i = 0; i < rows; ++i) {
      const std::uint64_t key = r.u64();
      r.f64s(m->mutable_row(key));
    }
    return m;
  }
  if (family == static_cast<std::uint32_t>(ModelFamily::kNeural)) {
    NeuralShape shape;
    shape.context = r.u64();
    shape.embed = r.u64();
    shape.hidden = r.u64();
    auto m = std::make_unique<TinyNeuralLM>(vocab, shape);
    for (auto& p : m->params().named()) {
      if (r.u64() != p.values.size()) {
        throw ParseError("checkpoint tensor '" + std::string(p.name) +
                         "' has the wrong size");
      }
      r.f64s(p.values);
    }
    return m;
  }
  throw ParseError("unknown model family tag " + std::to_string(family));
}

std::unique_ptr<LanguageModel> load_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace sdlab
