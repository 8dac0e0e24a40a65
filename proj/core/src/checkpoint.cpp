// Copyright (c) 2026 arowlab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "arow/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <fmt/format.h>

#include "arow/error.hpp"
#include "arow/io_util.hpp"

namespace arow {

namespace {

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
  }
}

void put_u64(std::vector<std::byte>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
  }
}

void put_f64(std::vector<std::byte>& out, double d) {
  put_u64(out, std::bit_cast<std::uint64_t>(d));
}

class Cursor {
 public:
  Cursor(const std::vector<std::byte>& buf, const std::string& path)
      : buf_(buf), path_(path) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(uint_n(4)); }
  std::uint64_t u64() { return uint_n(8); }
  double f64() { return std::bit_cast<double>(uint_n(8)); }

  void raw(char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, buf_.data() + pos_, n);
    pos_ += n;
  }

  std::size_t pos() const { return pos_; }

  void expect_end() const {
    if (pos_ != buf_.size()) {
      throw ParseError(fmt::format(
          "checkpoint {}: {} trailing bytes at offset {}", path_,
          buf_.size() - pos_, pos_));
    }
  }

 private:
  void need(std::size_t n) {
    if (pos_ + n > buf_.size()) {
      throw ParseError(fmt::format(
          "checkpoint {}: truncated at offset {} (needed {} more bytes)",
          path_, pos_, n));
    }
  }

  std::uint64_t uint_n(int n) {
    need(n);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(std::to_integer<unsigned>(buf_[pos_ + i]))
           << (8 * i);
    }
    pos_ += n;
    return v;
  }

  const std::vector<std::byte>& buf_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  params.spec.validate();
  std::vector<std::byte> out;
  out.reserve(64 + params.spec.param_count() * 8);
  for (char ch : kCheckpointMagic) out.push_back(static_cast<std::byte>(ch));
  put_u32(out, kCheckpointVersion);
  put_u64(out, params.spec.seed);
  put_u32(out, static_cast<std::uint32_t>(params.spec.input_dim));
  put_u32(out, static_cast<std::uint32_t>(params.spec.hidden.size()));
  for (std::size_t w : params.spec.hidden) {
    put_u32(out, static_cast<std::uint32_t>(w));
  }
  put_u32(out, static_cast<std::uint32_t>(params.spec.classes));
  put_u32(out, static_cast<std::uint32_t>(params.weights.size()));
  const auto dims = params.spec.layer_dims();
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    put_u32(out, static_cast<std::uint32_t>(dims[l].first));
    put_u32(out, static_cast<std::uint32_t>(dims[l].second));
    for (double v : params.weights[l]) put_f64(out, v);
    put_u32(out, static_cast<std::uint32_t>(params.biases[l].size()));
    for (double v : params.biases[l]) put_f64(out, v);
  }
  write_file_atomic(path, out.data(), out.size());
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("checkpoint {}: cannot open", path));
  const std::string raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  std::vector<std::byte> buf(raw.size());
  std::memcpy(buf.data(), raw.data(), raw.size());
  Cursor cur(buf, path);

  char magic[8];
  cur.raw(magic, 8);
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw ParseError(fmt::format("checkpoint {}: bad magic at offset 0", path));
  }
  const std::uint32_t version = cur.u32();
  if (version != kCheckpointVersion) {
    throw ParseError(fmt::format(
        "checkpoint {}: unsupported format version {} at offset 8", path,
        version));
  }

  ModelParams p;
  p.spec.seed = cur.u64();
  p.spec.input_dim = cur.u32();
  const std::uint32_t n_hidden = cur.u32();
  for (std::uint32_t i = 0; i < n_hidden; ++i) p.spec.hidden.push_back(cur.u32());
  p.spec.classes = cur.u32();
  p.spec.validate();

  const std::uint32_t n_layers = cur.u32();
  const auto dims = p.spec.layer_dims();
  if (n_layers != dims.size()) {
    throw ParseError(fmt::format(
        "checkpoint {}: layer count {} does not match topology ({} layers)",
        path, n_layers, dims.size()));
  }
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::size_t at = cur.pos();
    const std::uint32_t rows = cur.u32();
    const std::uint32_t cols = cur.u32();
    if (rows != dims[l].first || cols != dims[l].second) {
      throw ParseError(fmt::format(
          "checkpoint {}: layer {} is {}x{}, topology says {}x{} (offset {})",
          path, l, rows, cols, dims[l].first, dims[l].second, at));
    }
    std::vector<double> w(static_cast<std::size_t>(rows) * cols);
    for (double& v : w) v = cur.f64();
    p.weights.push_back(std::move(w));
    const std::uint32_t blen = cur.u32();
    if (blen != cols) {
      throw ParseError(fmt::format(
          "checkpoint {}: layer {} bias length {} != {} (offset {})", path, l,
          blen, cols, at));
    }
    std::vector<double> b(blen);
    for (double& v : b) v = cur.f64();
    p.biases.push_back(std::move(b));
  }
  cur.expect_end();
  return p;
}

}  // namespace arow
