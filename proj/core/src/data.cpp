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
#include "arow/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "arow/error.hpp"

namespace arow {

void Dataset::validate() const {
  if (labels.empty()) throw ConfigError("dataset: empty");
  if (dim == 0 || classes < 2) {
    throw ConfigError(fmt::format("dataset: dim {} classes {}", dim, classes));
  }
  if (inputs.size() != labels.size() * dim) {
    throw ShapeError(fmt::format(
        "dataset: {} input values for {} rows of dim {}", inputs.size(),
        labels.size(), dim));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw DomainError(fmt::format("dataset: label {} outside [0, {})", y, classes));
    }
  }
  for (double v : inputs) {
    if (!std::isfinite(v)) throw NonFiniteError("dataset: non-finite input");
  }
}

std::string Dataset::digest() const {
  std::vector<unsigned char> buf;
  buf.reserve(12 + inputs.size() * 8 + labels.size() * 4);
  auto put_u32 = [&buf](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back((v >> (8 * i)) & 0xff);
  };
  put_u32(static_cast<std::uint32_t>(labels.size()));
  put_u32(static_cast<std::uint32_t>(dim));
  put_u32(static_cast<std::uint32_t>(classes));
  for (double d : inputs) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) buf.push_back((v >> (8 * i)) & 0xff);
  }
  for (int y : labels) put_u32(static_cast<std::uint32_t>(y));

  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int md_len = 0;
  if (EVP_Digest(buf.data(), buf.size(), md, &md_len, EVP_sha256(), nullptr) != 1) {
    throw Error("dataset digest: EVP_Digest failed");
  }
  std::string hex;
  hex.reserve(md_len * 2);
  for (unsigned int i = 0; i < md_len; ++i) {
    hex += fmt::format("{:02x}", md[i]);
  }
  return hex;
}

namespace {

// Per-coordinate affine rescale into [0, 1]; degenerate ranges map to 0.5.
void rescale_unit_box(std::vector<double>& inputs, std::size_t dim) {
  const std::size_t n = inputs.size() / dim;
  for (std::size_t j = 0; j < dim; ++j) {
    double lo = inputs[j], hi = inputs[j];
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, inputs[i * dim + j]);
      hi = std::max(hi, inputs[i * dim + j]);
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      double& v = inputs[i * dim + j];
      v = range > 0.0 ? (v - lo) / range : 0.5;
      v = std::min(std::max(v, 0.0), 1.0);
    }
  }
}

}  // namespace

Dataset two_moons(std::size_t n, double noise_sd, std::uint64_t seed) {
  if (n < 2) throw ConfigError("two_moons: need n >= 2");
  if (noise_sd < 0.0) throw ConfigError("two_moons: noise_sd must be >= 0");

  const std::size_t n0 = (n + 1) / 2;
  const std::size_t n1 = n - n0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset ds;
  ds.dim = 2;
  ds.classes = 2;
  ds.inputs.reserve(n * 2);
  ds.labels.reserve(n);
  auto arc = [](std::size_t i, std::size_t count) {
    return count > 1 ? std::numbers::pi * static_cast<double>(i) /
                           static_cast<double>(count - 1)
                     : 0.0;
  };
  for (std::size_t i = 0; i < n0; ++i) {
    const double t = arc(i, n0);
    ds.inputs.push_back(std::cos(t) + noise_sd * noise(rng));
    ds.inputs.push_back(std::sin(t) + noise_sd * noise(rng));
    ds.labels.push_back(0);
  }
  for (std::size_t i = 0; i < n1; ++i) {
    const double t = arc(i, n1);
    ds.inputs.push_back(1.0 - std::cos(t) + noise_sd * noise(rng));
    ds.inputs.push_back(0.5 - std::sin(t) + noise_sd * noise(rng));
    ds.labels.push_back(1);
  }
  rescale_unit_box(ds.inputs, 2);
  ds.provenance =
      fmt::format("two_moons(n={},noise_sd={},seed={})", n, noise_sd, seed);
  ds.validate();
  return ds;
}

Dataset gaussian_blobs(std::size_t classes, std::size_t dim,
                       std::size_t n_per_class, double center_spread,
                       double noise_sd, std::uint64_t seed) {
  if (classes < 2) throw ConfigError("gaussian_blobs: need classes >= 2");
  if (dim < 1) throw ConfigError("gaussian_blobs: need dim >= 1");
  if (n_per_class < 1) throw ConfigError("gaussian_blobs: need n_per_class >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<double> centers(classes * dim);
  for (double& c : centers) c = 0.5 + center_spread * uni(rng);

  Dataset ds;
  ds.dim = dim;
  ds.classes = classes;
  ds.inputs.reserve(classes * n_per_class * dim);
  ds.labels.reserve(classes * n_per_class);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        double v = centers[c * dim + j] + noise_sd * noise(rng);
        ds.inputs.push_back(std::min(std::max(v, 0.0), 1.0));
      }
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  ds.provenance = fmt::format(
      "gaussian_blobs(classes={},dim={},n_per_class={},center_spread={},"
      "noise_sd={},seed={})",
      classes, dim, n_per_class, center_spread, noise_sd, seed);
  ds.validate();
  return ds;
}

namespace {

class IdxReader {
 public:
  IdxReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw ParseError(fmt::format("idx {}: cannot open", path));
  }

  std::uint32_t be_u32() {
    unsigned char b[4];
    in_.read(reinterpret_cast<char*>(b), 4);
    if (!in_) {
      throw ParseError(fmt::format("idx {}: truncated header at offset {}",
                                   path_, offset_));
    }
    offset_ += 4;
    return (static_cast<std::uint32_t>(b[0]) << 24) |
           (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) |
           static_cast<std::uint32_t>(b[3]);
  }

  void bytes(std::vector<unsigned char>& out, std::size_t n) {
    out.resize(n);
    in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw ParseError(fmt::format(
          "idx {}: truncated payload at offset {} (wanted {} bytes, got {})",
          path_, offset_, n, in_.gcount()));
    }
    offset_ += n;
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t offset_ = 0;
};

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::optional<std::size_t> limit) {
  IdxReader img(images_path);
  const std::uint32_t img_magic = img.be_u32();
  if (img_magic != 0x00000803u) {
    throw ParseError(fmt::format(
        "idx {}: bad image magic 0x{:08x} at offset 0", images_path, img_magic));
  }
  const std::uint32_t n_images = img.be_u32();
  const std::uint32_t rows = img.be_u32();
  const std::uint32_t cols = img.be_u32();

  IdxReader lab(labels_path);
  const std::uint32_t lab_magic = lab.be_u32();
  if (lab_magic != 0x00000801u) {
    throw ParseError(fmt::format(
        "idx {}: bad label magic 0x{:08x} at offset 0", labels_path, lab_magic));
  }
  const std::uint32_t n_labels = lab.be_u32();
  if (n_images != n_labels) {
    throw ParseError(fmt::format(
        "idx: image count {} in {} does not match label count {} in {}",
        n_images, images_path, n_labels, labels_path));
  }

  std::size_t take = n_images;
  if (limit) {
    if (*limit == 0) throw ConfigError("idx: limit 0 would produce an empty dataset");
    take = std::min<std::size_t>(*limit, n_images);
  }
  if (take == 0) throw ConfigError("idx: file holds no samples");

  const std::size_t d = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> pixels;
  img.bytes(pixels, take * d);
  std::vector<unsigned char> raw_labels;
  lab.bytes(raw_labels, take);

  Dataset ds;
  ds.dim = d;
  ds.inputs.resize(take * d);
  for (std::size_t i = 0; i < take * d; ++i) {
    ds.inputs[i] = static_cast<double>(pixels[i]) / 255.0;
  }
  ds.labels.assign(raw_labels.begin(), raw_labels.end());
  int max_label = 0;
  for (int y : ds.labels) max_label = std::max(max_label, y);
  ds.classes = static_cast<std::size_t>(std::max(max_label + 1, 2));
  ds.provenance = fmt::format("idx(images={},labels={},limit={})", images_path,
                              labels_path, limit ? fmt::format("{}", *limit) : "none");
  ds.validate();
  return ds;
}

std::vector<std::vector<std::size_t>> batches(std::size_t n,
                                              std::size_t batch_size,
                                              std::uint64_t seed, bool shuffle) {
  if (batch_size < 1 || batch_size > n) {
    throw ConfigError(fmt::format(
        "batches: batch size {} outside [1, {}]", batch_size, n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t at = 0; at < n; at += batch_size) {
    const std::size_t end = std::min(n, at + batch_size);
    out.emplace_back(order.begin() + at, order.begin() + end);
  }
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                          double first_fraction,
                                          std::uint64_t seed) {
  if (!(first_fraction > 0.0 && first_fraction < 1.0)) {
    throw ConfigError(fmt::format(
        "split: fraction {} outside (0, 1)", first_fraction));
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_first = static_cast<std::size_t>(
      std::llround(first_fraction * static_cast<double>(ds.size())));
  if (n_first == 0 || n_first == ds.size()) {
    throw ConfigError("split: a side would be empty");
  }

  auto take = [&](std::size_t from, std::size_t count, const char* part) {
    Dataset out;
    out.dim = ds.dim;
    out.classes = ds.classes;
    out.inputs.reserve(count * ds.dim);
    out.labels.reserve(count);
    for (std::size_t i = from; i < from + count; ++i) {
      const double* r = ds.row(order[i]);
      out.inputs.insert(out.inputs.end(), r, r + ds.dim);
      out.labels.push_back(ds.labels[order[i]]);
    }
    out.provenance = fmt::format("{}|split({},{},seed={})", ds.provenance, part,
                                 first_fraction, seed);
    return out;
  };
  return {take(0, n_first, "first"), take(n_first, ds.size() - n_first, "second")};
}

Batch gather(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Batch b;
  b.rows = idx.size();
  b.x.reserve(idx.size() * ds.dim);
  b.y.reserve(idx.size());
  for (std::size_t i : idx) {
    const double* r = ds.row(i);
    b.x.insert(b.x.end(), r, r + ds.dim);
    b.y.push_back(ds.labels[i]);
  }
  return b;
}

}  // namespace arow
