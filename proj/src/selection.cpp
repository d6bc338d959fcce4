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

#include "layerfuse/selection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "layerfuse/errors.hpp"
#include "layerfuse/metrics.hpp"

namespace layerfuse {
namespace {

constexpr std::array<std::pair<Heuristic, std::string_view>, 7> kHeuristicNames{{
    {Heuristic::entropy, "entropy"},
    {Heuristic::kurtosis, "kurtosis"},
    {Heuristic::std, "std"},
    {Heuristic::gini, "gini"},
    {Heuristic::jsd, "jsd"},
    {Heuristic::average, "average"},
    {Heuristic::random, "random"},
}};

void bin_into(std::span<const double> values, const HistogramSpec& spec,
              std::vector<std::size_t>& counts) {
  counts.assign(spec.bins, 0);
  double lo = 0.0;
  double hi = 1.0;
  if (spec.range_mode == RangeMode::empirical_minmax) {
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  if (hi == lo) {
    counts[0] = values.size();
    return;
  }
  const double scale = static_cast<double>(spec.bins) / (hi - lo);
  for (double v : values) {
    auto bin = static_cast<std::size_t>((v - lo) * scale);
    counts[std::min(bin, spec.bins - 1)]++;
  }
}

std::vector<double> normalized(const std::vector<std::size_t>& counts,
                               std::size_t total) {
  std::vector<double> p(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    p[b] = static_cast<double>(counts[b]) / static_cast<double>(total);
  }
  return p;
}

// Groups equal counts so that m bins of c samples contribute
// (m * c / n) * log(n / c); a uniform histogram then yields log B exactly.
double entropy_nats(const std::vector<std::size_t>& counts, std::size_t total) {
  std::vector<std::size_t> sorted(counts);
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(total);
  double h = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    if (sorted[i] > 0) {
      const auto c = static_cast<double>(sorted[i]);
      h += (static_cast<double>(j - i) * c / n) * std::log(n / c);
    }
    i = j;
  }
  return h;
}

double kl_bits(const std::vector<double>& p, const std::vector<double>& m) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) d += p[i] * std::log2(p[i] / m[i]);
  }
  return d;
}

// Caller has validated inputs; safe to run inside a parallel region.
double criterion_unchecked(std::span<const double> fused, Heuristic heuristic,
                           const HistogramSpec& spec) {
  const auto n = static_cast<double>(fused.size());
  switch (heuristic) {
    case Heuristic::entropy:
    case Heuristic::gini:
    case Heuristic::jsd: {
      std::vector<std::size_t> counts;
      bin_into(fused, spec, counts);
      const std::vector<double> p = normalized(counts, fused.size());
      if (heuristic == Heuristic::entropy) return entropy_nats(counts, fused.size());
      if (heuristic == Heuristic::gini) {
        double sq = 0.0;
        for (double v : p) sq += v * v;
        return 1.0 - sq;
      }
      const std::vector<double> uniform(p.size(), 1.0 / static_cast<double>(p.size()));
      std::vector<double> mid(p.size());
      for (std::size_t b = 0; b < p.size(); ++b) mid[b] = 0.5 * (p[b] + uniform[b]);
      return 0.5 * kl_bits(p, mid) + 0.5 * kl_bits(uniform, mid);
    }
    case Heuristic::kurtosis:
    case Heuristic::std: {
      double mean = 0.0;
      for (double v : fused) mean += v;
      mean /= n;
      double m2 = 0.0;
      double m4 = 0.0;
      for (double v : fused) {
        const double d2 = (v - mean) * (v - mean);
        m2 += d2;
        m4 += d2 * d2;
      }
      m2 /= n;
      m4 /= n;
      if (heuristic == Heuristic::std) return std::sqrt(m2);
      // A constant vector has no tails; report it as mesokurtic.
      if (m2 == 0.0) return 0.0;
      return m4 / (m2 * m2) - 3.0;
    }
    case Heuristic::average:
      return 0.0;
    case Heuristic::random:
      break;
  }
  throw ConfigError("heuristic needs an rng");
}

void require_values(std::span<const double> values, const HistogramSpec& spec) {
  spec.require_valid();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError("non-finite fused score at sample " + std::to_string(i));
    }
    if (spec.range_mode == RangeMode::fixed_unit &&
        (values[i] < 0.0 || values[i] > 1.0)) {
      throw DomainError("fixed_unit range needs scores in [0, 1]; sample " +
                        std::to_string(i) + " is " + std::to_string(values[i]));
    }
  }
}

bool better(double value, const LayerCombination& combo, double best_value,
            const LayerCombination& best, Orientation orientation) {
  if (value != best_value) {
    return orientation == Orientation::minimize ? value < best_value
                                                : value > best_value;
  }
  return combo < best;
}

void require_candidates_fit(const CandidateSet& candidates,
                            std::size_t layer_count) {
  if (candidates.combos.empty()) throw ConfigError("empty candidate set");
  for (const auto& combo : candidates.combos) combo.require_valid_for(layer_count);
}

}  // namespace

std::string_view to_string(RangeMode mode) {
  return mode == RangeMode::fixed_unit ? "fixed_unit" : "empirical_minmax";
}

RangeMode parse_range_mode(std::string_view name) {
  if (name == "empirical_minmax") return RangeMode::empirical_minmax;
  if (name == "fixed_unit") return RangeMode::fixed_unit;
  throw ConfigError("unknown range mode '" + std::string(name) + "'");
}

void HistogramSpec::require_valid() const {
  if (bins < kMinBins || bins > kMaxBins) {
    throw ConfigError("histogram bins must be in [2, 4096], got " +
                      std::to_string(bins));
  }
}

std::string_view to_string(Heuristic heuristic) {
  for (const auto& [h, name] : kHeuristicNames) {
    if (h == heuristic) return name;
  }
  return "entropy";
}

Heuristic parse_heuristic(std::string_view name) {
  for (const auto& [h, n] : kHeuristicNames) {
    if (n == name) return h;
  }
  throw ConfigError("unknown heuristic '" + std::string(name) + "'");
}

std::string_view to_string(Orientation orientation) {
  return orientation == Orientation::minimize ? "minimize" : "maximize";
}

Orientation orientation_of(Heuristic heuristic) {
  switch (heuristic) {
    case Heuristic::kurtosis:
    case Heuristic::std:
    case Heuristic::jsd:
      return Orientation::maximize;
    default:
      return Orientation::minimize;
  }
}

CandidateSet enumerate_candidates(std::size_t layer_count, std::size_t max_len) {
  if (layer_count == 0 || max_len < 1 || max_len > layer_count) {
    throw ConfigError("max_len must be in [1, " + std::to_string(layer_count) +
                      "], got " + std::to_string(max_len));
  }
  CandidateSet set{layer_count, max_len, {}};
  const std::size_t final_layer = layer_count - 1;
  // Choose `extra` layers from {0..L-2}, in lexicographic order per size.
  for (std::size_t extra = 0; extra < max_len; ++extra) {
    std::vector<std::size_t> pick(extra);
    for (std::size_t i = 0; i < extra; ++i) pick[i] = i;
    while (true) {
      std::vector<std::size_t> layers = pick;
      layers.push_back(final_layer);
      set.combos.emplace_back(std::move(layers));
      // Advance to the next extra-subset of {0..final_layer-1}.
      std::size_t i = extra;
      while (i > 0 && pick[i - 1] == final_layer - extra + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < extra; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return set;
}

FusedScores fuse(const ScoreTensor& scores, const LayerCombination& combo) {
  combo.require_valid_for(scores.layers());
  const auto width = static_cast<double>(combo.size());
  FusedScores fused(scores.samples());
  for (std::size_t n = 0; n < scores.samples(); ++n) {
    auto row = scores.row(n);
    double sum = 0.0;
    for (std::size_t l : combo) sum += row[l];
    fused[n] = sum / width;
  }
  return fused;
}

std::vector<std::size_t> histogram_counts(std::span<const double> values,
                                          const HistogramSpec& spec) {
  if (values.empty()) throw DomainError("histogram of an empty vector");
  require_values(values, spec);
  std::vector<std::size_t> counts;
  bin_into(values, spec, counts);
  return counts;
}

double histogram_entropy(std::span<const double> values,
                         const HistogramSpec& spec) {
  return heuristic_criterion(values, Heuristic::entropy, spec);
}

double heuristic_criterion(std::span<const double> fused, Heuristic heuristic,
                           const HistogramSpec& spec, SplitMix64* rng) {
  if (fused.size() < 2) {
    throw DomainError("selection criteria need at least 2 samples");
  }
  require_values(fused, spec);
  if (heuristic == Heuristic::random) {
    if (rng == nullptr) throw ConfigError("random heuristic needs a seeded rng");
    return rng->uniform();
  }
  return criterion_unchecked(fused, heuristic, spec);
}

SelectionResult select(const ScoreTensor& scores_id,
                       const CandidateSet& candidates,
                       const SelectionConfig& config, Exec exec) {
  config.histogram.require_valid();
  if (config.heuristic == Heuristic::random && !config.seed) {
    throw ConfigError("random heuristic requires an explicit seed");
  }
  require_candidates_fit(candidates, scores_id.layers());
  if (scores_id.samples() < 2) {
    throw DomainError("selection needs at least 2 ID samples");
  }
  require_valid(scores_id);
  require_values(scores_id.data(), config.histogram);

  const std::size_t count = candidates.combos.size();
  std::vector<double> values(count, 0.0);
  if (config.heuristic == Heuristic::random) {
    SplitMix64 rng(*config.seed);
    for (double& v : values) v = rng.uniform();
  } else if (config.heuristic != Heuristic::average) {
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
    for (std::size_t i = 0; i < count; ++i) {
      const FusedScores fused = fuse(scores_id, candidates.combos[i]);
      values[i] = criterion_unchecked(fused, config.heuristic, config.histogram);
    }
  }

  SelectionResult result;
  result.heuristic = config.heuristic;
  result.orientation = orientation_of(config.heuristic);
  result.histogram = config.histogram;
  result.criterion_values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    result.criterion_values.emplace_back(candidates.combos[i], values[i]);
  }

  if (config.heuristic == Heuristic::average) {
    result.best = LayerCombination::all(scores_id.layers());
    result.best_value = 0.0;
    return result;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < count; ++i) {
    if (better(values[i], candidates.combos[i], values[best],
               candidates.combos[best], result.orientation)) {
      best = i;
    }
  }
  result.best = candidates.combos[best];
  result.best_value = values[best];
  return result;
}

std::vector<RankedCombination> oracle_search(
    const ScoreTensor& scores_id, std::span<const ScoreTensor> scores_ood,
    const CandidateSet& candidates, Exec exec) {
  if (scores_ood.empty()) throw DomainError("oracle search needs an OOD set");
  for (const auto& ood : scores_ood) {
    if (ood.layers() != scores_id.layers()) {
      throw DomainError("OOD tensor has " + std::to_string(ood.layers()) +
                        " layers, ID has " + std::to_string(scores_id.layers()));
    }
    if (ood.samples() == 0) throw DomainError("empty OOD tensor");
  }
  if (scores_id.samples() == 0) throw DomainError("empty ID tensor");
  require_candidates_fit(candidates, scores_id.layers());

  const std::size_t count = candidates.combos.size();
  std::vector<RankedCombination> ranking(count);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::size_t i = 0; i < count; ++i) {
    const LayerCombination& combo = candidates.combos[i];
    const FusedScores fused_id = fuse(scores_id, combo);
    double sum = 0.0;
    for (const auto& ood : scores_ood) {
      sum += fpr_at_tpr(fused_id, fuse(ood, combo)).fpr;
    }
    ranking[i] = {combo, sum / static_cast<double>(scores_ood.size())};
  }
  std::sort(ranking.begin(), ranking.end(),
            [](const RankedCombination& a, const RankedCombination& b) {
              if (a.avg_fpr95 != b.avg_fpr95) return a.avg_fpr95 < b.avg_fpr95;
              return a.combo < b.combo;
            });
  return ranking;
}

}  // namespace layerfuse
