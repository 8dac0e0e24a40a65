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

#include <cstddef>
#include <string>

namespace arow {

/// Writes via a temp file in the same directory, then renames into place,
/// so readers never observe a partial file.
void write_file_atomic(const std::string& path, const void* data,
                       std::size_t size);
void write_file_atomic(const std::string& path, const std::string& text);

std::string read_file(const std::string& path);

/// Shortest round-trip decimal form of a double (what every CSV/JSON
/// artifact uses, keeping byte-for-byte reproducibility practical).
std::string format_double(double v);

/// 64-bit mix for deriving independent rng streams from (seed, tags).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag,
                       std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace arow
