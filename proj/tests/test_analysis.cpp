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

#include "doctest.h"
#include "layerfuse/analysis.hpp"
#include "layerfuse/errors.hpp"
#include "layerfuse/fixtures.hpp"
#include "layerfuse/scoring.hpp"
#include "oracles.hpp"

using namespace layerfuse;

namespace {

ProbTensor random_probs(SplitMix64& rng, std::size_t n, std::size_t l, std::size_t c) {
  std::vector<double> p(n * l * c);
  for (std::size_t r = 0; r < n * l; ++r) {
    double s = 0;
    for (std::size_t k = 0; k < c; ++k) s += p[r * c + k] = rng.uniform();
    for (std::size_t k = 0; k < c; ++k) p[r * c + k] /= s;
  }
  return ProbTensor(n, l, c, std::move(p));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("svcca self-similarity, rotation, scaling") {
    SplitMix64 rng(1);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 300, 12);
    CHECK(std::abs(svcca(x, x) - 1.0) < 1e-6);
    const Eigen::MatrixXd q = oracle::random_orthogonal(rng, 12);
    CHECK(std::abs(svcca(x, x * q) - 1.0) < 1e-6);
    const Eigen::MatrixXd y = oracle::gaussian_matrix(rng, 300, 8);
    const double base = svcca(x, y);
    CHECK(std::abs(svcca(x * q * 3.0, y * oracle::random_orthogonal(rng, 8)) - base) < 1e-6);
    CHECK_THROWS_AS(svcca(x, y, 0.0), ConfigError);
    CHECK_THROWS_AS(svcca(x, Eigen::MatrixXd::Zero(300, 4)), DomainError);
    CHECK_THROWS_AS(svcca(x, y.topRows(10)), DomainError);
  }

  TEST_CASE("svcca agrees with textbook CCA") {
    SplitMix64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::MatrixXd a = oracle::gaussian_matrix(rng, 400, 30);
      Eigen::MatrixXd b = oracle::gaussian_matrix(rng, 400, 30);
      b.leftCols(10) += a.leftCols(10);
      CHECK(std::abs(svcca(a, b) - oracle::svcca(a, b)) < 1e-6);
    }
  }

  TEST_CASE("svcca matrix and distance profile") {
    SplitMix64 rng(3);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 200, 6);
    std::vector<Eigen::MatrixXd> same(4, x);
    const LayerPairMatrix m = svcca_matrix(same);
    for (double v : m.matrix.values) CHECK(std::abs(v - 1.0) < 1e-6);
    const auto two = layer_distance_profile({x, x});
    CHECK(two.size() == 1);
    CHECK(two.at(1).size() == 1);

    // Each layer rotates the previous one and adds fresh noise.
    std::vector<Eigen::MatrixXd> drift{oracle::gaussian_matrix(rng, 500, 10)};
    for (int l = 1; l < 6; ++l) {
      drift.push_back(drift.back() * oracle::random_orthogonal(rng, 10) +
                      0.6 * oracle::gaussian_matrix(rng, 500, 10));
    }
    const auto serial = svcca_matrix(drift, 0.99, Exec::serial);
    const auto parallel = svcca_matrix(drift, 0.99, Exec::parallel);
    CHECK(serial.matrix.values == parallel.matrix.values);
    const auto profile = layer_distance_profile(drift);
    double prev = 2.0;
    for (const auto& [delta, values] : profile) {
      CAPTURE(delta);
      CHECK(values.size() == drift.size() - delta);
      CHECK(median(values) <= prev);
      prev = median(values);
    }
  }

  TEST_CASE("top-1 agreement") {
    ProbTensor same(2, 3, 2, {0.9, 0.1, 0.9, 0.1, 0.9, 0.1, 0.2, 0.8, 0.2, 0.8, 0.2, 0.8});
    for (double v : top1_agreement(same).matrix.values) CHECK(v == 1.0);
    ProbTensor disjoint(2, 2, 2, {0.9, 0.1, 0.1, 0.9, 0.3, 0.7, 0.7, 0.3});
    CHECK(top1_agreement(disjoint).matrix(0, 1) == 0.0);
    CHECK(argmax(std::vector<double>{0.4, 0.4, 0.2}) == 0);

    SplitMix64 rng(4);
    const ProbTensor p = random_probs(rng, 100, 5, 3);
    const LayerPairMatrix m = top1_agreement(p, Exec::serial);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        double agree = 0;
        for (std::size_t n = 0; n < 100; ++n) {
          auto a = p.row(n, i), b = p.row(n, j);
          agree += std::max_element(a.begin(), a.end()) - a.begin() ==
                   std::max_element(b.begin(), b.end()) - b.begin();
        }
        CHECK(m.matrix(i, j) == agree / 100);
      }
    }
    CHECK(top1_agreement(p, Exec::parallel).matrix.values == m.matrix.values);
  }

  TEST_CASE("jensen-shannon") {
    const std::vector<double> p{0.5, 0.5}, q{1.0, 0.0}, r{0.0, 1.0};
    CHECK(jensen_shannon(p, p) == 0.0);
    CHECK(jensen_shannon(q, r) == doctest::Approx(1.0).epsilon(1e-15));
    const long double m0 = 0.75L, m1 = 0.25L;
    const long double kl_p = 0.5L * std::log2(0.5L / m0) + 0.5L * std::log2(0.5L / m1);
    const long double kl_q = std::log2(1.0L / m0);
    const double expected = static_cast<double>(0.5L * (kl_p + kl_q));
    CHECK(std::abs(jensen_shannon(p, q) - expected) < 1e-15);
    CHECK(expected == doctest::Approx(0.311278).epsilon(1e-6));

    SplitMix64 rng(5);
    const ProbTensor probs = random_probs(rng, 40, 4, 6);
    const LayerPairMatrix m = jsd_matrix(probs);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(m.matrix(i, i) == 0.0);
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(m.matrix(i, j) == m.matrix(j, i));
        CHECK(m.matrix(i, j) >= 0.0);
        CHECK(m.matrix(i, j) <= 1.0);
      }
    }
  }

  TEST_CASE("entropy profile") {
    ProbTensor hot(3, 2, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 0, 0, 0, 1});
    for (double v : entropy_profile(hot)) CHECK(v == 0.0);
    ProbTensor flat(2, 3, 1000, std::vector<double>(6000, 0.001));
    for (double v : entropy_profile(flat)) CHECK(v == doctest::Approx(6.907755).epsilon(1e-6));

    SplitMix64 rng(6);
    const ProbTensor p = random_probs(rng, 30, 3, 5);
    const auto profile = entropy_profile(p);
    for (std::size_t l = 0; l < 3; ++l) {
      double sum = 0;
      for (std::size_t n = 0; n < 30; ++n) {
        for (double v : p.row(n, l)) sum -= v * std::log(v);
      }
      CHECK(profile[l] == doctest::Approx(sum / 30).epsilon(1e-12));
    }
  }

  TEST_CASE("jaccard distance between top combinations") {
    const std::vector<LayerCombination> combos{{0, 11}, {1, 11}, {0, 11}, {0, 1, 5, 11}};
    const SquareMatrix m = jaccard_topk(combos, 4);
    CHECK(m(0, 2) == 0.0);
    CHECK(m(0, 1) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    for (double v : m.values) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
    CHECK(jaccard_topk(combos, 2).size == 2);
    CHECK_THROWS_AS(jaccard_topk(combos, 5), ConfigError);
    CHECK_THROWS_AS(jaccard_topk(combos, 0), ConfigError);
  }

  TEST_CASE("spearman") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      auto x = oracle::random_vector(rng, 30);
      auto y = oracle::random_vector(rng, 30);
      for (double& v : x) v = std::round(v * 5);
      CHECK(spearman(x, y) == doctest::Approx(oracle::spearman(x, y)).epsilon(1e-12));
    }
    CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}) ==
          doctest::Approx(1.0));
    CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5}) == 0.0);
    CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}), DomainError);
  }

  TEST_CASE("entropy vs fpr scatter on the planted fixture") {
    FixtureConfig config;
    config.n_id = 400;
    config.n_ood = 400;
    const FixtureSet fx = generate_fixture(config);
    const ScoreTensor id = mcm_score(fx.id, 1.0);
    std::vector<ScoreTensor> ood;
    for (const auto& o : fx.ood) ood.push_back(mcm_score(o, 1.0));

    const auto cands = enumerate_candidates(12, 3);
    const auto rows = entropy_fpr_scatter(id, ood, cands, {});
    CHECK(rows.size() == cands.combos.size());
    std::vector<double> h, f;
    for (const auto& r : rows) {
      h.push_back(r.entropy);
      f.push_back(r.avg_fpr95);
    }
    const auto lowest_h = std::min_element(h.begin(), h.end()) - h.begin();
    CHECK(f[lowest_h] == *std::min_element(f.begin(), f.end()));
    CHECK(spearman(h, f) > 0.0);
    CHECK(spearman(h, f) == doctest::Approx(oracle::spearman(h, f)).epsilon(1e-12));

    CandidateSet single{12, 1, {LayerCombination{11}}};
    CHECK(entropy_fpr_scatter(id, ood, single, {}).size() == 1);
  }

  TEST_CASE("size sweep") {
    // Each layer sees the same latent plus independent noise, so wider
    // averages separate ID from OOD better.
    SplitMix64 rng(8);
    const std::size_t n = 400, layers = 6;
    auto make = [&](double shift) {
      std::vector<double> d;
      for (std::size_t i = 0; i < n; ++i) {
        const double latent = rng.gaussian(shift, 0.3);
        for (std::size_t l = 0; l < layers; ++l) d.push_back(latent + rng.gaussian(0, 1));
      }
      return ScoreTensor(n, layers, d);
    };
    const ScoreTensor id = make(2.0);
    const std::vector<ScoreTensor> ood{make(0.0)};
    const auto ranking = oracle_search(id, ood, enumerate_candidates(layers, layers));
    const auto rows = combination_size_sweep(ranking, layers);
    REQUIRE(rows.size() == layers);
    CHECK(rows[0].combos == 1);
    CHECK(rows[0].mean_avg_fpr95 ==
          oracle::fpr_at_tpr(id.column(5), ood[0].column(5), 0.95));
    for (std::size_t s = 1; s < layers; ++s) {
      CHECK(rows[s].min_avg_fpr95 <= rows[s - 1].min_avg_fpr95);
      CHECK(rows[s].min_avg_fpr95 <= rows[s].mean_avg_fpr95);
      CHECK(rows[s].mean_avg_fpr95 <= rows[s].max_avg_fpr95);
    }
  }
}
