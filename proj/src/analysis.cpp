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

#include "layerfuse/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "layerfuse/errors.hpp"
#include "layerfuse/metrics.hpp"

namespace layerfuse {
namespace {

// Orthonormal basis of the retained singular directions of centered acts.
Eigen::MatrixXd retained_basis(const Eigen::MatrixXd& acts, double var_keep,
                               const char* which) {
  if (!acts.allFinite()) {
    throw DomainError(std::string("non-finite activations in ") + which);
  }
  const Eigen::MatrixXd centered = acts.rowwise() - acts.colwise().mean();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
  const Eigen::VectorXd s2 = svd.singularValues().array().square();
  const double total = s2.sum();
  if (!(total > 0.0)) {
    throw DomainError(std::string("rank-0 activations in ") + which);
  }
  Eigen::Index keep = 0;
  double mass = 0.0;
  while (keep < s2.size()) {
    mass += s2[keep++];
    if (mass / total >= var_keep) break;
  }
  return svd.matrixU().leftCols(keep);
}

LayerPairMatrix symmetric_fill(std::size_t layers, PairKind kind,
                               double diagonal, Exec exec,
                               const auto& cell) {
  LayerPairMatrix out{kind, SquareMatrix(layers, diagonal)};
  const std::size_t pairs = layers * (layers - 1) / 2;
  std::vector<std::pair<std::size_t, std::size_t>> index;
  index.reserve(pairs);
  for (std::size_t i = 0; i < layers; ++i) {
    for (std::size_t j = i + 1; j < layers; ++j) index.emplace_back(i, j);
  }
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::size_t p = 0; p < index.size(); ++p) {
    const auto [i, j] = index[p];
    const double v = cell(i, j);
    out.matrix(i, j) = v;
    out.matrix(j, i) = v;
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

}  // namespace

std::string_view to_string(PairKind kind) {
  switch (kind) {
    case PairKind::svcca:
      return "svcca";
    case PairKind::top1_agreement:
      return "top1_agreement";
    case PairKind::jsd:
      return "jsd";
  }
  return "svcca";
}

double svcca(const Eigen::MatrixXd& acts_a, const Eigen::MatrixXd& acts_b,
             double var_keep) {
  if (!(var_keep > 0.0 && var_keep <= 1.0)) {
    throw ConfigError("var_keep must lie in (0, 1]");
  }
  if (acts_a.rows() != acts_b.rows()) {
    throw DomainError("svcca inputs have different sample counts");
  }
  const Eigen::MatrixXd basis_a = retained_basis(acts_a, var_keep, "first input");
  const Eigen::MatrixXd basis_b = retained_basis(acts_b, var_keep, "second input");
  if (acts_a.rows() <= std::max(basis_a.cols(), basis_b.cols())) {
    throw DomainError("svcca needs more samples than retained directions");
  }
  // Both bases are orthonormal, so this is the whitened cross-covariance.
  const Eigen::MatrixXd cross = basis_a.transpose() * basis_b;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
  const Eigen::VectorXd rho = svd.singularValues();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    sum += std::clamp(rho[i], 0.0, 1.0);
  }
  return std::clamp(sum / static_cast<double>(rho.size()), 0.0, 1.0);
}

LayerPairMatrix svcca_matrix(const std::vector<Eigen::MatrixXd>& acts,
                             double var_keep, Exec exec) {
  if (acts.empty()) throw DomainError("svcca_matrix needs at least one layer");
  // Surface input errors before entering the parallel region.
  for (std::size_t l = 0; l < acts.size(); ++l) {
    (void)svcca(acts[l], acts[l], var_keep);
    if (acts[l].rows() != acts.front().rows()) {
      throw DomainError("layer " + std::to_string(l) + " has a different sample count");
    }
  }
  return symmetric_fill(acts.size(), PairKind::svcca, 1.0, exec,
                        [&](std::size_t i, std::size_t j) {
                          return svcca(acts[i], acts[j], var_keep);
                        });
}

std::map<std::size_t, std::vector<double>> layer_distance_profile(
    const std::vector<Eigen::MatrixXd>& acts, double var_keep, Exec exec) {
  if (acts.size() < 2) throw DomainError("layer_distance_profile needs L >= 2");
  const LayerPairMatrix m = svcca_matrix(acts, var_keep, exec);
  std::map<std::size_t, std::vector<double>> profile;
  for (std::size_t d = 1; d < acts.size(); ++d) {
    auto& values = profile[d];
    for (std::size_t l = 0; l + d < acts.size(); ++l) {
      values.push_back(m.matrix(l, l + d));
    }
  }
  return profile;
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

LayerPairMatrix top1_agreement(const ProbTensor& probs, Exec exec) {
  const std::size_t samples = probs.samples();
  const std::size_t layers = probs.layers();
  std::vector<std::size_t> top(samples * layers);
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t l = 0; l < layers; ++l) top[n * layers + l] = argmax(probs.row(n, l));
  }
  return symmetric_fill(layers, PairKind::top1_agreement, 1.0, exec,
                        [&](std::size_t i, std::size_t j) {
                          std::size_t same = 0;
                          for (std::size_t n = 0; n < samples; ++n) {
                            same += top[n * layers + i] == top[n * layers + j];
                          }
                          return static_cast<double>(same) /
                                 static_cast<double>(samples);
                        });
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  double d = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double m = 0.5 * (p[c] + q[c]);
    if (p[c] > 0.0) d += 0.5 * p[c] * std::log2(p[c] / m);
    if (q[c] > 0.0) d += 0.5 * q[c] * std::log2(q[c] / m);
  }
  return std::clamp(d, 0.0, 1.0);
}

LayerPairMatrix jsd_matrix(const ProbTensor& probs, Exec exec) {
  const std::size_t samples = probs.samples();
  return symmetric_fill(probs.layers(), PairKind::jsd, 0.0, exec,
                        [&](std::size_t i, std::size_t j) {
                          double sum = 0.0;
                          for (std::size_t n = 0; n < samples; ++n) {
                            sum += jensen_shannon(probs.row(n, i), probs.row(n, j));
                          }
                          return sum / static_cast<double>(samples);
                        });
}

std::vector<double> entropy_profile(const ProbTensor& probs) {
  std::vector<double> out(probs.layers(), 0.0);
  for (std::size_t l = 0; l < probs.layers(); ++l) {
    double sum = 0.0;
    for (std::size_t n = 0; n < probs.samples(); ++n) {
      for (double p : probs.row(n, l)) {
        if (p > 0.0) sum -= p * std::log(p);
      }
    }
    out[l] = sum / static_cast<double>(probs.samples());
  }
  return out;
}

SquareMatrix jaccard_topk(std::span<const LayerCombination> combos,
                          std::size_t k) {
  if (k < 1 || k > combos.size()) {
    throw ConfigError("k must be in [1, " + std::to_string(combos.size()) +
                      "], got " + std::to_string(k));
  }
  SquareMatrix out(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto& a = combos[i].layers();
      const auto& b = combos[j].layers();
      std::vector<std::size_t> common;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                            std::back_inserter(common));
      const std::size_t unite = a.size() + b.size() - common.size();
      out(i, j) = 1.0 - static_cast<double>(common.size()) /
                            static_cast<double>(unite);
    }
  }
  return out;
}

SquareMatrix jaccard_topk(std::span<const RankedCombination> ranking,
                          std::size_t k) {
  std::vector<LayerCombination> combos;
  combos.reserve(ranking.size());
  for (const auto& r : ranking) combos.push_back(r.combo);
  return jaccard_topk(std::span<const LayerCombination>(combos), k);
}

std::vector<ScatterRow> entropy_fpr_scatter(
    const ScoreTensor& scores_id, std::span<const ScoreTensor> scores_ood,
    const CandidateSet& candidates, const HistogramSpec& spec, Exec exec) {
  const SelectionResult selection =
      select(scores_id, candidates, SelectionConfig{spec, Heuristic::entropy, {}}, exec);
  const std::vector<RankedCombination> ranking =
      oracle_search(scores_id, scores_ood, candidates, exec);
  std::map<LayerCombination, double> fpr;
  for (const auto& r : ranking) fpr[r.combo] = r.avg_fpr95;
  std::vector<ScatterRow> rows;
  rows.reserve(candidates.combos.size());
  for (const auto& [combo, entropy] : selection.criterion_values) {
    rows.push_back({combo, entropy, fpr.at(combo)});
  }
  return rows;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("spearman needs two equally sized vectors of length >= 2");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<SizeSweepRow> combination_size_sweep(
    std::span<const RankedCombination> ranking, std::size_t max_len) {
  std::vector<SizeSweepRow> rows(max_len);
  for (std::size_t s = 0; s < max_len; ++s) {
    rows[s].combo_size = s + 1;
    rows[s].min_avg_fpr95 = std::numeric_limits<double>::infinity();
    rows[s].max_avg_fpr95 = -std::numeric_limits<double>::infinity();
  }
  for (const auto& r : ranking) {
    const std::size_t s = r.combo.size();
    if (s == 0 || s > max_len) continue;
    auto& row = rows[s - 1];
    row.combos++;
    row.mean_avg_fpr95 += r.avg_fpr95;
    row.min_avg_fpr95 = std::min(row.min_avg_fpr95, r.avg_fpr95);
    row.max_avg_fpr95 = std::max(row.max_avg_fpr95, r.avg_fpr95);
  }
  for (auto& row : rows) {
    if (row.combos == 0) {
      row.min_avg_fpr95 = row.max_avg_fpr95 = 0.0;
    } else {
      row.mean_avg_fpr95 /= static_cast<double>(row.combos);
    }
  }
  return rows;
}

}  // namespace layerfuse
