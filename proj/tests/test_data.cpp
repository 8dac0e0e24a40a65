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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "arow/data.hpp"
#include "arow/error.hpp"

using namespace arow;

TEST_CASE("two_moons") {
  SUBCASE("zero noise, n = 4 lands on the rescaled half-circle points") {
    const Dataset ds = two_moons(4, 0.0, 1);
    // raw points: (1,0), (-1,0) class 0; (0,0.5), (2,0.5) class 1
    // x range [-1,2], y range [0,0.5] -> affine image below
    REQUIRE(ds.size() == 4);
    CHECK(ds.labels == std::vector<int>{0, 0, 1, 1});
    CHECK(ds.row(0)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(ds.row(0)[1] == doctest::Approx(0.0));
    CHECK(ds.row(1)[0] == doctest::Approx(0.0));
    CHECK(ds.row(2)[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(ds.row(2)[1] == doctest::Approx(1.0));
    CHECK(ds.row(3)[0] == doctest::Approx(1.0));
  }
  SUBCASE("same seed reproduces the dataset, different seed does not") {
    const Dataset a = two_moons(100, 0.2, 9);
    const Dataset b = two_moons(100, 0.2, 9);
    CHECK(a.inputs == b.inputs);
    CHECK(a.labels == b.labels);
    CHECK(a.digest() == b.digest());
    CHECK(a.digest() != two_moons(100, 0.2, 10).digest());
  }
  SUBCASE("all coordinates in [0,1], classes balanced") {
    const Dataset ds = two_moons(101, 0.3, 4);
    for (double v : ds.inputs) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    std::size_t c0 = 0;
    for (int y : ds.labels) c0 += y == 0 ? 1 : 0;
    CHECK(c0 == 51);  // ceil(101/2)
  }
}

TEST_CASE("gaussian_blobs") {
  SUBCASE("zero noise collapses samples onto class centers") {
    const Dataset ds = gaussian_blobs(3, 2, 5, 0.8, 0.0, 2);
    for (std::size_t c = 0; c < 3; ++c) {
      const double* first = ds.row(c * 5);
      for (std::size_t i = 1; i < 5; ++i) {
        CHECK(ds.row(c * 5 + i)[0] == first[0]);
        CHECK(ds.row(c * 5 + i)[1] == first[1]);
      }
    }
  }
  SUBCASE("class counts are exact and inputs clamped") {
    const Dataset ds = gaussian_blobs(4, 3, 7, 1.5, 0.5, 3);
    std::vector<std::size_t> counts(4, 0);
    for (int y : ds.labels) counts[y] += 1;
    for (std::size_t c = 0; c < 4; ++c) CHECK(counts[c] == 7);
    for (double v : ds.inputs) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

namespace {

void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

// Synthetic two-image IDX pair for the round-trip oracle.
void write_idx_pair(const std::string& images, const std::string& labels,
                    std::uint32_t count, bool corrupt_magic = false,
                    bool truncate = false, std::uint32_t label_count_override = 0) {
  {
    std::ofstream out(images, std::ios::binary);
    write_be32(out, corrupt_magic ? 0x00000899u : 0x00000803u);
    write_be32(out, count);
    write_be32(out, 2);
    write_be32(out, 2);
    std::vector<unsigned char> px;
    for (std::uint32_t i = 0; i < count; ++i) {
      for (unsigned char v : {0, 128, 255, 64}) {
        px.push_back(static_cast<unsigned char>(v + i));
      }
    }
    if (truncate) px.resize(px.size() - 2);
    out.write(reinterpret_cast<const char*>(px.data()),
              static_cast<std::streamsize>(px.size()));
  }
  {
    std::ofstream out(labels, std::ios::binary);
    write_be32(out, 0x00000801u);
    write_be32(out, label_count_override ? label_count_override : count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const unsigned char y = static_cast<unsigned char>(i % 2);
      out.write(reinterpret_cast<const char*>(&y), 1);
    }
  }
}

}  // namespace

TEST_CASE("load_idx") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "arow_idx_test";
  fs::create_directories(dir);
  const std::string images = (dir / "im.idx").string();
  const std::string labels = (dir / "lb.idx").string();

  SUBCASE("round trip of a synthetic pair, 255 maps to exactly 1.0") {
    write_idx_pair(images, labels, 2);
    const Dataset ds = load_idx(images, labels);
    REQUIRE(ds.size() == 2);
    CHECK(ds.dim == 4);
    CHECK(ds.inputs[0] == 0.0);
    CHECK(ds.inputs[1] == doctest::Approx(128.0 / 255.0));
    CHECK(ds.inputs[2] == 1.0);
    CHECK(ds.labels == std::vector<int>{0, 1});
  }
  SUBCASE("limit truncates from the front; limit 0 rejected") {
    write_idx_pair(images, labels, 3);
    const Dataset ds = load_idx(images, labels, 2);
    CHECK(ds.size() == 2);
    CHECK_THROWS_AS(load_idx(images, labels, 0), ConfigError);
  }
  SUBCASE("bad magic names the offending file") {
    write_idx_pair(images, labels, 2, /*corrupt_magic=*/true);
    CHECK_THROWS_WITH_AS(load_idx(images, labels),
                         doctest::Contains("bad image magic"), ParseError);
  }
  SUBCASE("truncated payload reports the offset") {
    write_idx_pair(images, labels, 2, false, /*truncate=*/true);
    CHECK_THROWS_WITH_AS(load_idx(images, labels), doctest::Contains("truncated"),
                         ParseError);
  }
  SUBCASE("image/label count mismatch") {
    write_idx_pair(images, labels, 2, false, false, /*label_count_override=*/5);
    CHECK_THROWS_WITH_AS(load_idx(images, labels),
                         doctest::Contains("does not match label count"),
                         ParseError);
  }
  fs::remove_all(dir);
}

TEST_CASE("batches") {
  SUBCASE("K = N gives a single permuted batch") {
    const auto bs = batches(10, 10, 3, true);
    REQUIRE(bs.size() == 1);
    std::set<std::size_t> seen(bs[0].begin(), bs[0].end());
    CHECK(seen.size() == 10);
  }
  SUBCASE("N=10, K=3 gives sizes 3,3,3,1") {
    const auto bs = batches(10, 3, 0, false);
    REQUIRE(bs.size() == 4);
    CHECK(bs[0].size() == 3);
    CHECK(bs[3].size() == 1);
  }
  SUBCASE("partition property over many (N, K)") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 50; ++t) {
      const std::size_t n = 1 + rng() % 40;
      const std::size_t k = 1 + rng() % n;
      const auto bs = batches(n, k, rng(), true);
      std::set<std::size_t> seen;
      std::size_t total = 0;
      for (const auto& b : bs) {
        total += b.size();
        seen.insert(b.begin(), b.end());
      }
      CHECK(total == n);
      CHECK(seen.size() == n);
    }
  }
  SUBCASE("fixed seed reproduces order; out-of-range K rejected") {
    CHECK(batches(20, 7, 5, true) == batches(20, 7, 5, true));
    CHECK_THROWS_AS(batches(5, 6, 0, false), ConfigError);
    CHECK_THROWS_AS(batches(5, 0, 0, false), ConfigError);
  }
}

TEST_CASE("split_dataset partitions rows") {
  const Dataset ds = two_moons(100, 0.1, 5);
  const auto [a, b] = split_dataset(ds, 0.8, 17);
  CHECK(a.size() == 80);
  CHECK(b.size() == 20);
  CHECK(a.dim == 2);
  CHECK(split_dataset(ds, 0.8, 17).first.inputs == a.inputs);
  CHECK_THROWS_AS(split_dataset(ds, 0.0, 1), ConfigError);
}

TEST_CASE("dataset digest is order-sensitive and stable") {
  Dataset ds;
  ds.dim = 1;
  ds.classes = 2;
  ds.inputs = {0.25, 0.75};
  ds.labels = {0, 1};
  ds.provenance = "fixture";
  const std::string d1 = ds.digest();
  CHECK(d1.size() == 64);
  std::swap(ds.inputs[0], ds.inputs[1]);
  CHECK(ds.digest() != d1);
}
