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

#include "layerfuse/combination.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "layerfuse/errors.hpp"

namespace layerfuse {

LayerCombination::LayerCombination(std::initializer_list<std::size_t> layers)
    : LayerCombination(std::vector<std::size_t>(layers)) {}

LayerCombination::LayerCombination(std::vector<std::size_t> layers)
    : layers_(std::move(layers)) {
  std::sort(layers_.begin(), layers_.end());
  if (std::adjacent_find(layers_.begin(), layers_.end()) != layers_.end()) {
    throw DomainError("layer combination contains duplicate indices");
  }
  if (layers_.empty()) {
    throw DomainError("layer combination must not be empty");
  }
}

LayerCombination LayerCombination::all(std::size_t layer_count) {
  std::vector<std::size_t> layers(layer_count);
  std::iota(layers.begin(), layers.end(), std::size_t{0});
  return LayerCombination(std::move(layers));
}

LayerCombination LayerCombination::parse(std::string_view text) {
  std::vector<std::size_t> layers;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find_first_of(",;", pos);
    if (next == std::string_view::npos) next = text.size();
    std::string_view token = text.substr(pos, next - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    std::size_t value = 0;
    auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} ||
        ptr != token.data() + token.size()) {
      throw ConfigError("invalid layer index '" + std::string(token) +
                        "' in combination '" + std::string(text) + "'");
    }
    layers.push_back(value);
    pos = next + 1;
  }
  try {
    return LayerCombination(std::move(layers));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

bool LayerCombination::contains(std::size_t layer) const {
  return std::binary_search(layers_.begin(), layers_.end(), layer);
}

void LayerCombination::require_in_range(std::size_t layer_count) const {
  if (layers_.empty()) throw DomainError("empty layer combination");
  if (layers_.back() >= layer_count) {
    throw DomainError("layer index " + std::to_string(layers_.back()) +
                      " out of range for " + std::to_string(layer_count) +
                      " layers");
  }
}

void LayerCombination::require_valid_for(std::size_t layer_count) const {
  require_in_range(layer_count);
  if (layers_.back() != layer_count - 1) {
    throw DomainError("layer combination " + to_string() +
                      " does not include the final layer " +
                      std::to_string(layer_count - 1));
  }
}

std::string LayerCombination::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(layers_[i]);
  }
  return out;
}

std::strong_ordering operator<=>(const LayerCombination& a,
                                 const LayerCombination& b) {
  if (auto c = a.layers_.size() <=> b.layers_.size(); c != 0) return c;
  return a.layers_ <=> b.layers_;
}

}  // namespace layerfuse
