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
#include <string>

#include "layerfuse/combination.hpp"
#include "layerfuse/exec.hpp"
#include "layerfuse/tensor.hpp"

namespace layerfuse {

// ID is the positive class everywhere: a sample is flagged in-distribution
// when its score is >= the threshold.

struct FprAtTpr {
  double fpr = 0.0;
  double threshold = 0.0;
};

/// threshold is the largest ID score t with fraction(id >= t) >= tpr_target;
/// fpr is fraction(ood >= t). The achieved TPR is never below the target.
/// Throws DomainError on empty input or tpr_target outside (0, 1].
FprAtTpr fpr_at_tpr(std::span<const double> id_scores,
                    std::span<const double> ood_scores,
                    double tpr_target = 0.95);

/// Mann-Whitney AUROC: (#pairs id > ood + 0.5 #ties) / (n_id n_ood), counted
/// exactly after sorting. Throws DomainError on empty input.
double auroc(std::span<const double> id_scores,
             std::span<const double> ood_scores);

struct DatasetMetrics {
  double fpr95 = 0.0;
  double auroc = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
};

struct EvalReport {
  std::map<std::string, DatasetMetrics> per_dataset;
  /// Unweighted means over per_dataset.
  double avg_fpr95 = 0.0;
  double avg_auroc = 0.0;
  LayerCombination combo;
  ScoreRule score_rule = ScoreRule::raw;
  double threshold_at_tpr95 = 0.0;
};

/// Fuses every tensor over `combo` and computes FPR@95 and AUROC per OOD set.
/// Throws DomainError when layer counts disagree or no OOD set is given.
EvalReport evaluate(const ScoreTensor& scores_id,
                    const std::map<std::string, ScoreTensor>& scores_ood_sets,
                    const LayerCombination& combo, Exec exec = Exec::parallel);

}  // namespace layerfuse
