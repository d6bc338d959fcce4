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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "layerfuse/combination.hpp"
#include "layerfuse/tensor.hpp"

namespace layerfuse {

/// Synthetic logit families for desk-scale experiments.
///
///   complementary  Every ID sample is confident (margin `high_margin`) at
///                  exactly one layer of the planted subset and unconfident
///                  (`low_margin`) at the others, so the planted layers are
///                  anticorrelated and their fused MCM score is nearly
///                  constant. A fraction `hard_fraction` of ID samples has
///                  zero margin everywhere. OOD margins on the planted
///                  layers are uniform in low_margin +- ood_spread. Layers
///                  outside the subset carry no signal: ID and OOD margins
///                  there are both uniform in
///                  [low_margin - ood_spread, high_margin].
///   redundant      One latent margin per sample shared by all layers plus
///                  small per-layer noise; ID margins are larger than OOD.
///   flat           Near-zero logits at every layer, giving near-uniform
///                  class probabilities for ID and OOD alike.
enum class FixtureFamily { complementary, redundant, flat };

std::string_view to_string(FixtureFamily family);
FixtureFamily parse_fixture_family(std::string_view name);

struct FixtureConfig {
  FixtureFamily family = FixtureFamily::complementary;
  std::uint64_t seed = 0;
  std::size_t n_id = 1000;
  std::size_t n_ood = 1000;
  std::size_t ood_sets = 2;
  std::size_t layers = 12;
  std::size_t classes = 50;
  LayerCombination planted{2, 5, 11};
  double high_margin = 8.0;
  double low_margin = 1.0;
  double hard_fraction = 0.03;
  double id_noise = 1e-4;
  double ood_spread = 0.1;

  /// Throws ConfigError on zero sizes or a planted subset that does not fit.
  void require_valid() const;
};

struct FixtureSet {
  FixtureConfig config;
  RawLogits id;
  std::vector<RawLogits> ood;
};

/// Deterministic in config (including seed).
FixtureSet generate_fixture(const FixtureConfig& config);

}  // namespace layerfuse
