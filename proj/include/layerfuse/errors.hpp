// Copyright 2026 The LayerFuse Authors.
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

namespace layerfuse {

// Error classes map one-to-one onto CLI exit codes (see tools/cli.cpp).

/// Invalid user configuration: bad flag values, out-of-range parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arguments that are well-formed but violate a mathematical precondition
/// (mismatched layer counts, out-of-range layer index, zero-norm vector).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or unreadable file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure (cannot open, read or write a path).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structurally readable tensor that fails an invariant check.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace layerfuse
