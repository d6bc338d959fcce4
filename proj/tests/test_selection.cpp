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

#include <cmath>
#include <set>

#include "doctest.h"
#include "layerfuse/errors.hpp"
#include "layerfuse/selection.hpp"
#include "oracles.hpp"

using namespace layerfuse;

namespace {

std::vector<std::vector<std::size_t>> as_vectors(const CandidateSet& set) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& c : set.combos) out.push_back(c.layers());
  return out;
}

SelectionConfig with(Heuristic h, std::optional<std::uint64_t> seed = {}) {
  SelectionConfig c;
  c.heuristic = h;
  c.seed = seed;
  return c;
}

SelectionConfig by_bins(std::size_t bins) {
  SelectionConfig c;
  c.histogram.bins = bins;
  return c;
}

}  // namespace

TEST_SUITE("selection") {
  TEST_CASE("candidate enumeration") {
    CHECK(enumerate_candidates(12, 5).combos.size() == 1 + 11 + 55 + 165 + 330);
    CHECK(as_vectors(enumerate_candidates(4, 1)) ==
          std::vector<std::vector<std::size_t>>{{3}});
    CHECK(as_vectors(enumerate_candidates(3, 3)) ==
          std::vector<std::vector<std::size_t>>{{2}, {0, 2}, {1, 2}, {0, 1, 2}});
    CHECK_THROWS_AS(enumerate_candidates(12, 0), ConfigError);
    CHECK_THROWS_AS(enumerate_candidates(3, 4), ConfigError);

    const auto set = enumerate_candidates(9, 4);
    auto expected = oracle::all_combos(9, 4);
    std::set<std::vector<std::size_t>> a(expected.begin(), expected.end());
    const auto got = as_vectors(set);
    std::set<std::vector<std::size_t>> b(got.begin(), got.end());
    CHECK(a == b);
    CHECK(got.size() == expected.size());
    CHECK(std::is_sorted(set.combos.begin(), set.combos.end()));
  }

  TEST_CASE("fuse") {
    SplitMix64 rng(1);
    const ScoreTensor t = oracle::random_scores(rng, 10, 4);
    CHECK(fuse(t, {3}) == t.column(3));
    const ScoreTensor two(1, 2, {0.2, 0.8});
    CHECK(fuse(two, {0, 1})[0] == doctest::Approx(0.5));
    const ScoreTensor flat(4, 3, std::vector<double>(12, 0.37));
    for (double v : fuse(flat, {0, 2})) CHECK(v == doctest::Approx(0.37).epsilon(1e-15));
    CHECK_THROWS_AS(fuse(t, {0, 1}), DomainError);
  }

  TEST_CASE("fuse is permutation-equivariant in samples") {
    SplitMix64 rng(2);
    const ScoreTensor t = oracle::random_scores(rng, 8, 5);
    std::vector<double> rev;
    for (std::size_t n = 8; n-- > 0;) {
      for (std::size_t l = 0; l < 5; ++l) rev.push_back(t(n, l));
    }
    const FusedScores a = fuse(t, {1, 3, 4});
    const FusedScores b = fuse(ScoreTensor(8, 5, rev), {4, 1, 3});
    for (std::size_t n = 0; n < 8; ++n) CHECK(a[n] == b[7 - n]);
  }

  TEST_CASE("histogram entropy examples") {
    const HistogramSpec spec{32, RangeMode::empirical_minmax};
    CHECK(histogram_entropy(std::vector<double>(5, 0.4), spec) == 0.0);
    std::vector<double> one_per_bin;
    for (int b = 0; b < 32; ++b) one_per_bin.push_back(b / 31.0);
    CHECK(histogram_entropy(one_per_bin, spec) == std::log(32.0));

    const double h = histogram_entropy(std::vector<double>{0.0, 0.5, 1.0},
                                       {2, RangeMode::empirical_minmax});
    const long double third = 1.0L / 3;
    const double expected =
        static_cast<double>(-third * std::log(third) - 2 * third * std::log(2 * third));
    CHECK(std::abs(h - expected) < 1e-15);
    CHECK(h == doctest::Approx(0.636514).epsilon(1e-6));

    CHECK(histogram_counts(std::vector<double>{0.0, 0.5, 1.0},
                           {2, RangeMode::fixed_unit}) ==
          std::vector<std::size_t>{1, 2});
    CHECK_THROWS_AS(histogram_entropy(std::vector<double>{1.5, 0.2},
                                      {8, RangeMode::fixed_unit}),
                    DomainError);
    CHECK_THROWS_AS(histogram_entropy(std::vector<double>{0.1, 0.2}, {1}), ConfigError);
  }

  TEST_CASE("entropy is bounded by ln B and matches the edge-scan oracle") {
    SplitMix64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t bins = 2 + rng.index(200);
      const auto v = oracle::random_vector(rng, 2 + rng.index(300));
      const double h = histogram_entropy(v, {bins});
      CHECK(h >= 0.0);
      CHECK(h <= std::log(static_cast<double>(bins)) + 1e-12);
      CHECK(std::abs(h - oracle::minmax_entropy(v, bins)) < 1e-12);
    }
  }

  TEST_CASE("other heuristics") {
    const HistogramSpec spec{16};
    std::vector<double> uniform;
    for (int b = 0; b < 16; ++b) uniform.push_back(b);
    CHECK(heuristic_criterion(uniform, Heuristic::gini, spec) ==
          doctest::Approx(1.0 - 1.0 / 16).epsilon(1e-15));
    CHECK(std::abs(heuristic_criterion(uniform, Heuristic::jsd, spec)) < 1e-15);
    CHECK(heuristic_criterion(std::vector<double>{-1, 1, -1, 1}, Heuristic::kurtosis,
                              spec) == doctest::Approx(-2.0));
    CHECK(heuristic_criterion(std::vector<double>{2, 2, 2}, Heuristic::kurtosis, spec) ==
          0.0);
    CHECK(heuristic_criterion(std::vector<double>{1, 3}, Heuristic::std, spec) ==
          doctest::Approx(1.0));
    const double point = heuristic_criterion(std::vector<double>(10, 0.5),
                                             Heuristic::jsd, spec);
    CHECK(point > 0.0);
    CHECK(point <= 1.0);
    CHECK_THROWS_AS(heuristic_criterion(uniform, Heuristic::random, spec), ConfigError);
    CHECK_THROWS_AS(heuristic_criterion(std::vector<double>{1}, Heuristic::std, spec),
                    DomainError);
    CHECK(orientation_of(Heuristic::entropy) == Orientation::minimize);
    CHECK(orientation_of(Heuristic::gini) == Orientation::minimize);
    CHECK(orientation_of(Heuristic::kurtosis) == Orientation::maximize);
    CHECK(orientation_of(Heuristic::jsd) == Orientation::maximize);
  }

  TEST_CASE("singleton candidate set and point-mass winner") {
    SplitMix64 rng(4);
    const ScoreTensor t = oracle::random_scores(rng, 50, 6);
    CandidateSet only{6, 1, {LayerCombination{5}}};
    CHECK(select(t, only).best == LayerCombination{5});

    std::vector<double> data(t.data().begin(), t.data().end());
    // Layers 1 and 5 cancel to a constant mean.
    for (std::size_t n = 0; n < 50; ++n) data[n * 6 + 1] = 1.0 - data[n * 6 + 5];
    const SelectionResult r = select(ScoreTensor(50, 6, data), enumerate_candidates(6, 3));
    CHECK(r.best == LayerCombination{1, 5});
    CHECK(r.best_value == 0.0);
  }

  TEST_CASE("select equals brute-force argmin") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
      const ScoreTensor t = oracle::random_scores(rng, 200, 12);
      const SelectionResult r = select(t, enumerate_candidates(12, 3), by_bins(32));
      double best = 1e300;
      std::vector<std::size_t> arg;
      for (const auto& c : oracle::all_combos(12, 3)) {
        const double h = oracle::minmax_entropy(oracle::mean_of_columns(t, c), 32);
        if (h < best - 1e-12 ||
            (std::abs(h - best) <= 1e-12 &&
             (c.size() < arg.size() || (c.size() == arg.size() && c < arg)))) {
          best = h;
          arg = c;
        }
      }
      CHECK(r.best.layers() == arg);
      CHECK(std::abs(r.best_value - best) < 1e-12);
    }
  }

  TEST_CASE("ties go to the smaller, then lexicographically first combo") {
    const ScoreTensor flat(4, 4, std::vector<double>(16, 0.5));
    CHECK(select(flat, enumerate_candidates(4, 4)).best == LayerCombination{3});
    CandidateSet pair{4, 2, {LayerCombination{2, 3}, LayerCombination{0, 3}}};
    CHECK(select(flat, pair).best == LayerCombination{0, 3});
  }

  TEST_CASE("selection is invariant to positive affine maps") {
    SplitMix64 rng(6);
    const ScoreTensor t = oracle::random_scores(rng, 300, 8);
    const auto cands = enumerate_candidates(8, 4);
    const SelectionResult base = select(t, cands);
    for (auto [a, b] : {std::pair{2.0, 0.0}, std::pair{0.25, 0.0}, std::pair{4.0, -8.0}}) {
      std::vector<double> d(t.data().begin(), t.data().end());
      for (double& v : d) v = a * v + b;
      const SelectionResult r = select(ScoreTensor(300, 8, d), cands);
      CHECK(r.best == base.best);
      for (std::size_t i = 0; i < cands.combos.size(); ++i) {
        CHECK(r.criterion_values[i].second == base.criterion_values[i].second);
      }
    }
  }

  TEST_CASE("serial and parallel selection agree") {
    SplitMix64 rng(7);
    const ScoreTensor t = oracle::random_scores(rng, 150, 10);
    const auto cands = enumerate_candidates(10, 4);
    for (Heuristic h : {Heuristic::entropy, Heuristic::kurtosis, Heuristic::std,
                        Heuristic::gini, Heuristic::jsd}) {
      const SelectionResult a = select(t, cands, with(h), Exec::serial);
      const SelectionResult b = select(t, cands, with(h), Exec::parallel);
      CHECK(a.best == b.best);
      CHECK(a.criterion_values == b.criterion_values);
    }
  }

  TEST_CASE("random and average heuristics") {
    SplitMix64 rng(8);
    const ScoreTensor t = oracle::random_scores(rng, 20, 6);
    const auto cands = enumerate_candidates(6, 2);
    CHECK_THROWS_AS(select(t, cands, with(Heuristic::random)), ConfigError);
    const SelectionResult a = select(t, cands, with(Heuristic::random, 42));
    const SelectionResult b = select(t, cands, with(Heuristic::random, 42));
    CHECK(a.best == b.best);
    CHECK(a.criterion_values == b.criterion_values);
    CHECK(select(t, cands, with(Heuristic::average)).best == LayerCombination::all(6));
    CHECK_THROWS_AS(select(ScoreTensor(1, 6, std::vector<double>(6, 0.1)), cands),
                    DomainError);
  }

  TEST_CASE("oracle search") {
    const ScoreTensor id(4, 3, {1, 0, 0.9, 1, 0, 0.8, 1, 0, 0.7, 1, 0, 0.6});
    const ScoreTensor ood(4, 3, {0, 1, 0.9, 0, 1, 0.8, 0, 1, 0.7, 0, 1, 0.6});
    const std::vector<ScoreTensor> oods{ood};
    CandidateSet one{3, 1, {LayerCombination{2}}};
    CHECK(oracle_search(id, oods, one).size() == 1);
    const auto ranking = oracle_search(id, oods, enumerate_candidates(3, 2));
    CHECK(ranking.front().combo == LayerCombination{0, 2});
    CHECK(ranking.front().avg_fpr95 == 0.0);

    SplitMix64 rng(9);
    const ScoreTensor a = oracle::random_scores(rng, 50, 6);
    const std::vector<ScoreTensor> b{oracle::random_scores(rng, 50, 6),
                                     oracle::random_scores(rng, 40, 6)};
    const auto r = oracle_search(a, b, enumerate_candidates(6, 3));
    for (const auto& row : r) {
      double sum = 0;
      for (const auto& o : b) {
        sum += oracle::fpr_at_tpr(oracle::mean_of_columns(a, row.combo.layers()),
                                  oracle::mean_of_columns(o, row.combo.layers()), 0.95);
      }
      CHECK(std::abs(row.avg_fpr95 - sum / 2) < 1e-12);
    }
    CHECK(std::is_sorted(r.begin(), r.end(), [](const auto& x, const auto& y) {
      return x.avg_fpr95 < y.avg_fpr95;
    }));
  }
}
