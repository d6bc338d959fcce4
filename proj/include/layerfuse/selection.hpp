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
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "layerfuse/combination.hpp"
#include "layerfuse/exec.hpp"
#include "layerfuse/rng.hpp"
#include "layerfuse/tensor.hpp"

namespace layerfuse {

/// Histogram range used when binning fused scores.
///   empirical_minmax: [min, max] of the fused values (affine invariant)
///   fixed_unit:       [0, 1], for scores that are probabilities
enum class RangeMode { empirical_minmax, fixed_unit };

std::string_view to_string(RangeMode mode);
RangeMode parse_range_mode(std::string_view name);

struct HistogramSpec {
  static constexpr std::size_t kMinBins = 2;
  static constexpr std::size_t kMaxBins = 4096;

  std::size_t bins = 32;
  RangeMode range_mode = RangeMode::empirical_minmax;

  /// Throws ConfigError unless kMinBins <= bins <= kMaxBins.
  void require_valid() const;
};

enum class Heuristic { entropy, kurtosis, std, gini, jsd, average, random };
enum class Orientation { minimize, maximize };

std::string_view to_string(Heuristic heuristic);
Heuristic parse_heuristic(std::string_view name);
std::string_view to_string(Orientation orientation);
Orientation orientation_of(Heuristic heuristic);

/// Candidate layer combinations for one layer count. Every combo contains
/// the final layer and has at most max_len layers.
struct CandidateSet {
  std::size_t layer_count = 0;
  std::size_t max_len = 0;
  std::vector<LayerCombination> combos;
};

/// All subsets of {0..L-1} that contain L-1 and have 1..max_len elements,
/// ordered by size then lexicographically. There are
/// sum_{k<max_len} C(L-1, k) of them.
/// Throws ConfigError unless 1 <= max_len <= layer_count.
CandidateSet enumerate_candidates(std::size_t layer_count, std::size_t max_len);

using FusedScores = std::vector<double>;

/// Per-sample arithmetic mean of the combo's columns, summed in ascending
/// layer order. Throws DomainError if combo is not valid for `scores`.
FusedScores fuse(const ScoreTensor& scores, const LayerCombination& combo);

/// Bin counts of `values`. The final bin is closed on the right; under
/// empirical_minmax a constant input puts every value in bin 0.
/// Throws DomainError on non-finite values, or values outside [0, 1] in
/// fixed_unit mode.
std::vector<std::size_t> histogram_counts(std::span<const double> values,
                                          const HistogramSpec& spec);

/// Shannon entropy (natural log) of the normalized histogram, in [0, ln B].
/// Requires at least two values.
double histogram_entropy(std::span<const double> values,
                         const HistogramSpec& spec);

/// Value of one selection heuristic on a fused score vector.
///
///   entropy   histogram entropy, nats                  (minimize)
///   kurtosis  excess kurtosis, population moments      (maximize)
///   std       population standard deviation            (maximize)
///   gini      1 - sum p_b^2 over the histogram         (minimize)
///   jsd       base-2 JSD of histogram vs uniform       (maximize)
///   average   0 for every combo                        (see select)
///   random    uniform draw from `rng`                  (minimize)
///
/// `random` without an rng throws ConfigError.
double heuristic_criterion(std::span<const double> fused, Heuristic heuristic,
                           const HistogramSpec& spec,
                           SplitMix64* rng = nullptr);

struct SelectionConfig {
  HistogramSpec histogram;
  Heuristic heuristic = Heuristic::entropy;
  /// Required by Heuristic::random.
  std::optional<std::uint64_t> seed;
};

struct SelectionResult {
  LayerCombination best;
  double best_value = 0.0;
  /// Criterion per candidate, in candidate order.
  std::vector<std::pair<LayerCombination, double>> criterion_values;
  Heuristic heuristic = Heuristic::entropy;
  Orientation orientation = Orientation::minimize;
  HistogramSpec histogram;
};

/// Scores every candidate on the unlabeled ID tensor and returns the best
/// one under the heuristic's orientation. Ties go to the smaller combo, then
/// to the lexicographically smaller one, so the result does not depend on
/// candidate order or thread schedule. Heuristic::average always returns the
/// all-layers combination.
///
/// Throws DomainError if the tensor has fewer than two samples or a
/// candidate does not fit it; ConfigError for an empty candidate set, bad
/// bins, or random without a seed.
SelectionResult select(const ScoreTensor& scores_id,
                       const CandidateSet& candidates,
                       const SelectionConfig& config = {},
                       Exec exec = Exec::parallel);

struct RankedCombination {
  LayerCombination combo;
  double avg_fpr95 = 0.0;
};

/// Ranks every candidate by its FPR@95 averaged over the OOD sets, using the
/// labels select never sees. Ascending; ties ordered like select.
std::vector<RankedCombination> oracle_search(
    const ScoreTensor& scores_id, std::span<const ScoreTensor> scores_ood,
    const CandidateSet& candidates, Exec exec = Exec::parallel);

}  // namespace layerfuse
