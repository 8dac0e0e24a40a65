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
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace arow {

/// Labeled inputs in [0, 1]^dim, immutable after construction.
struct Dataset {
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<double> inputs;  ///< N x dim row-major
  std::vector<int> labels;
  std::string provenance;      ///< generator name + params, or file digest

  std::size_t size() const { return labels.size(); }
  const double* row(std::size_t i) const { return inputs.data() + i * dim; }
  void validate() const;

  /// SHA-256 hex of the canonical little-endian serialization
  /// (u32 N | u32 dim | u32 classes | f64 inputs | u32 labels).
  std::string digest() const;
};

/// Interleaved half-circles with Gaussian coordinate noise, rescaled into
/// [0, 1]^2. Class 0 gets ceil(n/2) samples, class 1 the rest.
Dataset two_moons(std::size_t n, double noise_sd, std::uint64_t seed);

/// C Gaussian clusters with seeded centers, clamped into [0, 1]^dim.
/// Centers are uniform in the centered cube of side `center_spread`.
Dataset gaussian_blobs(std::size_t classes, std::size_t dim,
                       std::size_t n_per_class, double center_spread,
                       double noise_sd, std::uint64_t seed);

/// IDX image/label pair (big-endian headers, magic 0x803 / 0x801); pixels
/// scaled by 1/255. `limit` truncates from the front.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::optional<std::size_t> limit = std::nullopt);

/// Index batches covering 0..n-1 exactly once; seeded permutation when
/// shuffling, the final short batch is kept.
std::vector<std::vector<std::size_t>> batches(std::size_t n,
                                              std::size_t batch_size,
                                              std::uint64_t seed, bool shuffle);

/// Seeded shuffle-split into (first, second) with `first_fraction` of rows.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                          double first_fraction,
                                          std::uint64_t seed);

/// Gathered rows as a batch matrix plus labels.
struct Batch {
  std::vector<double> x;  ///< B x dim
  std::vector<int> y;
  std::size_t rows = 0;
};
Batch gather(const Dataset& ds, const std::vector<std::size_t>& idx);

}  // namespace arow
