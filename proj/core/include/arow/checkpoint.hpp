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

#include <string>

#include "arow/model.hpp"

namespace arow {

// Self-describing binary checkpoint, all fields little-endian:
//   magic "AROWCKPT" | u32 version | u64 init seed
//   u32 input_dim | u32 n_hidden | u32[n_hidden] widths | u32 classes
//   u32 n_layers | per layer: u32 rows, u32 cols, f64[rows*cols] weights,
//                              u32 bias_len, f64[bias_len] biases

inline constexpr char kCheckpointMagic[8] = {'A', 'R', 'O', 'W',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace arow
