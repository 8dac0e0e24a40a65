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

#include <stdexcept>
#include <string>

namespace arow {

/// Base class for every error raised by the library. The CLI maps
/// subclasses to distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or malformed tensor/parameter shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Math input outside the operation's domain (log of non-positive,
/// out-of-range label, empty class).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An operation produced NaN/Inf from finite inputs.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (IDX, checkpoint, config file syntax).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Work refused up front because it would exceed a hard budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// PGD attack failure (non-finite gradients).
class AttackError : public Error {
 public:
  using Error::Error;
};

}  // namespace arow
