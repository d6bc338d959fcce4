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
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "layerfuse/combination.hpp"
#include "layerfuse/exec.hpp"
#include "layerfuse/selection.hpp"
#include "layerfuse/tensor.hpp"

namespace layerfuse {

/// Dense row-major square matrix.
struct SquareMatrix {
  std::size_t size = 0;
  std::vector<double> values;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0)
      : size(n), values(n * n, fill) {}
  double& operator()(std::size_t i, std::size_t j) { return values[i * size + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return values[i * size + j];
  }
};

enum class PairKind { svcca, top1_agreement, jsd };
std::string_view to_string(PairKind kind);

/// Symmetric layer-by-layer matrix. Diagonal is 1 for svcca and
/// top1_agreement, 0 for jsd; all entries lie in [0, 1].
struct LayerPairMatrix {
  PairKind kind = PairKind::svcca;
  SquareMatrix matrix;
};

/// Mean canonical correlation between the SVD-truncated column spaces of two
/// activation matrices (rows are samples). Each matrix is centered and keeps
/// the fewest singular directions holding `var_keep` of the squared singular
/// value mass; the canonical correlations are the singular values of the
/// product of the two orthonormal bases.
///
/// Throws DomainError on constant (rank-0) input, mismatched row counts, or
/// too few samples for the retained rank; ConfigError if var_keep is not in
/// (0, 1].
double svcca(const Eigen::MatrixXd& acts_a, const Eigen::MatrixXd& acts_b,
             double var_keep = 0.99);

/// SVCCA between every pair of layers.
LayerPairMatrix svcca_matrix(const std::vector<Eigen::MatrixXd>& acts,
                             double var_keep = 0.99,
                             Exec exec = Exec::parallel);

/// For each distance d in [1, L-1], svcca(layer l, layer l+d) for all l.
std::map<std::size_t, std::vector<double>> layer_distance_profile(
    const std::vector<Eigen::MatrixXd>& acts, double var_keep = 0.99,
    Exec exec = Exec::parallel);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> row);

/// Fraction of samples whose top-1 class agrees between layers i and j.
LayerPairMatrix top1_agreement(const ProbTensor& probs,
                               Exec exec = Exec::parallel);

/// Base-2 Jensen-Shannon divergence of two distributions.
double jensen_shannon(std::span<const double> p, std::span<const double> q);

/// Mean over samples of jensen_shannon(p[n, i], p[n, j]).
LayerPairMatrix jsd_matrix(const ProbTensor& probs, Exec exec = Exec::parallel);

/// Mean Shannon entropy (nats) of the class distribution at each layer.
std::vector<double> entropy_profile(const ProbTensor& probs);

/// Jaccard distance 1 - |a & b| / |a | b| between the first k combos.
/// Throws ConfigError unless 1 <= k <= combos.size().
SquareMatrix jaccard_topk(std::span<const LayerCombination> combos,
                          std::size_t k);
SquareMatrix jaccard_topk(std::span<const RankedCombination> ranking,
                          std::size_t k);

struct ScatterRow {
  LayerCombination combo;
  double entropy = 0.0;
  double avg_fpr95 = 0.0;
};

/// Histogram entropy on the ID scores next to the oracle FPR@95, one row per
/// candidate in candidate order.
std::vector<ScatterRow> entropy_fpr_scatter(
    const ScoreTensor& scores_id, std::span<const ScoreTensor> scores_ood,
    const CandidateSet& candidates, const HistogramSpec& spec,
    Exec exec = Exec::parallel);

/// Spearman rank correlation; tied values get their average rank.
/// Returns 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct SizeSweepRow {
  std::size_t combo_size = 0;
  std::size_t combos = 0;
  double mean_avg_fpr95 = 0.0;
  double min_avg_fpr95 = 0.0;
  double max_avg_fpr95 = 0.0;
};

/// Aggregates average FPR@95 per combination size 1..max_len. Sizes with no
/// combos report zeros.
std::vector<SizeSweepRow> combination_size_sweep(
    std::span<const RankedCombination> ranking, std::size_t max_len);

}  // namespace layerfuse
