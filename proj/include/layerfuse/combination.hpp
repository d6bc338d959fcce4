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

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace layerfuse {

/// Sorted, duplicate-free, non-empty set of zero-based layer indices.
///
/// Whether the set contains the final layer depends on the tensor it is
/// applied to, so that check lives in `require_valid_for`.
class LayerCombination {
 public:
  LayerCombination() = default;
  LayerCombination(std::initializer_list<std::size_t> layers);
  explicit LayerCombination(std::vector<std::size_t> layers);

  /// All layers 0..layer_count-1.
  static LayerCombination all(std::size_t layer_count);

  /// Parses "2,5,11" (also accepts ';' as separator).
  static LayerCombination parse(std::string_view text);

  const std::vector<std::size_t>& layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  std::size_t back() const { return layers_.back(); }
  auto begin() const { return layers_.begin(); }
  auto end() const { return layers_.end(); }
  bool contains(std::size_t layer) const;

  /// Every index < layer_count. Throws DomainError otherwise.
  void require_in_range(std::size_t layer_count) const;
  /// In range and includes layer_count-1. Throws DomainError otherwise.
  void require_valid_for(std::size_t layer_count) const;

  /// "0;5;11", semicolon separated so it fits in one CSV cell.
  std::string to_string() const;

  /// Smaller combinations first, then lexicographic on indices.
  friend std::strong_ordering operator<=>(const LayerCombination& a,
                                          const LayerCombination& b);
  friend bool operator==(const LayerCombination& a,
                         const LayerCombination& b) = default;

 private:
  std::vector<std::size_t> layers_;
};

}  // namespace layerfuse
