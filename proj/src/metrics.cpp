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

#include "layerfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "layerfuse/errors.hpp"
#include "layerfuse/selection.hpp"

namespace layerfuse {
namespace {

void require_non_empty(std::span<const double> id, std::span<const double> ood) {
  if (id.empty() || ood.empty()) {
    throw DomainError("metrics need non-empty ID and OOD score vectors");
  }
}

// Smallest k with k / n >= target, evaluated in the same floating point
// expression a threshold scan would use.
std::size_t required_positives(std::size_t n, double target) {
  const double dn = static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(target * dn));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && static_cast<double>(k - 1) / dn >= target) --k;
  while (k < n && static_cast<double>(k) / dn < target) ++k;
  return k;
}

}  // namespace

FprAtTpr fpr_at_tpr(std::span<const double> id_scores,
                    std::span<const double> ood_scores, double tpr_target) {
  require_non_empty(id_scores, ood_scores);
  if (!(tpr_target > 0.0 && tpr_target <= 1.0)) {
    throw DomainError("tpr_target must lie in (0, 1]");
  }
  std::vector<double> id(id_scores.begin(), id_scores.end());
  const std::size_t k = required_positives(id.size(), tpr_target);
  // k-th largest ID score: every t above it keeps fewer than k positives.
  std::nth_element(id.begin(), id.begin() + (k - 1), id.end(),
                   std::greater<>());
  const double threshold = id[k - 1];
  const auto flagged = std::count_if(ood_scores.begin(), ood_scores.end(),
                                     [threshold](double s) { return s >= threshold; });
  return {static_cast<double>(flagged) / static_cast<double>(ood_scores.size()),
          threshold};
}

double auroc(std::span<const double> id_scores,
             std::span<const double> ood_scores) {
  require_non_empty(id_scores, ood_scores);
  std::vector<double> ood(ood_scores.begin(), ood_scores.end());
  std::sort(ood.begin(), ood.end());
  // Twice the Mann-Whitney U, kept integral so the result is exact.
  std::uint64_t twice_u = 0;
  for (double s : id_scores) {
    auto [lo, hi] = std::equal_range(ood.begin(), ood.end(), s);
    twice_u += 2 * static_cast<std::uint64_t>(lo - ood.begin()) +
               static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(id_scores.size()) *
          static_cast<double>(ood.size()));
}

EvalReport evaluate(const ScoreTensor& scores_id,
                    const std::map<std::string, ScoreTensor>& scores_ood_sets,
                    const LayerCombination& combo, Exec exec) {
  if (scores_ood_sets.empty()) throw DomainError("evaluate needs an OOD set");
  for (const auto& [name, ood] : scores_ood_sets) {
    if (ood.layers() != scores_id.layers()) {
      throw DomainError("OOD set '" + name + "' has " +
                        std::to_string(ood.layers()) + " layers, ID has " +
                        std::to_string(scores_id.layers()));
    }
    if (ood.samples() == 0) throw DomainError("OOD set '" + name + "' is empty");
  }
  const FusedScores fused_id = fuse(scores_id, combo);

  std::vector<const std::pair<const std::string, ScoreTensor>*> sets;
  for (const auto& entry : scores_ood_sets) sets.push_back(&entry);
  std::vector<DatasetMetrics> metrics(sets.size());
  std::vector<double> thresholds(sets.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const FusedScores fused_ood = fuse(sets[i]->second, combo);
    const FprAtTpr fpr = fpr_at_tpr(fused_id, fused_ood);
    metrics[i] = {fpr.fpr, auroc(fused_id, fused_ood), fused_id.size(),
                  fused_ood.size()};
    thresholds[i] = fpr.threshold;
  }

  EvalReport report;
  report.combo = combo;
  report.score_rule = scores_id.meta().score_rule;
  report.threshold_at_tpr95 = thresholds.front();
  double fpr_sum = 0.0;
  double auroc_sum = 0.0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    report.per_dataset.emplace(sets[i]->first, metrics[i]);
    fpr_sum += metrics[i].fpr95;
    auroc_sum += metrics[i].auroc;
  }
  report.avg_fpr95 = fpr_sum / static_cast<double>(sets.size());
  report.avg_auroc = auroc_sum / static_cast<double>(sets.size());
  return report;
}

}  // namespace layerfuse
