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

#include "doctest.h"
#include "layerfuse/errors.hpp"
#include "layerfuse/fixtures.hpp"
#include "layerfuse/metrics.hpp"
#include "layerfuse/scoring.hpp"
#include "layerfuse/selection.hpp"

using namespace layerfuse;

TEST_SUITE("fixtures") {
  TEST_CASE("shapes and determinism") {
    FixtureConfig c;
    c.n_id = 40;
    c.n_ood = 30;
    c.ood_sets = 3;
    const FixtureSet a = generate_fixture(c);
    const FixtureSet b = generate_fixture(c);
    CHECK(a.id.samples() == 40);
    CHECK(a.id.layers() == 12);
    CHECK(a.id.classes() == 50);
    REQUIRE(a.ood.size() == 3);
    CHECK(a.ood[2].samples() == 30);
    CHECK(std::equal(a.id.data().begin(), a.id.data().end(), b.id.data().begin()));
    c.seed = 1;
    const FixtureSet other = generate_fixture(c);
    CHECK_FALSE(std::equal(a.id.data().begin(), a.id.data().end(), other.id.data().begin()));
  }

  TEST_CASE("invalid configurations") {
    FixtureConfig c;
    c.planted = {2, 5};
    CHECK_THROWS_AS(generate_fixture(c), ConfigError);
    c.planted = {2, 12};
    CHECK_THROWS_AS(generate_fixture(c), ConfigError);
    FixtureConfig zero;
    zero.n_id = 0;
    CHECK_THROWS_AS(generate_fixture(zero), ConfigError);
    CHECK(parse_fixture_family("redundant") == FixtureFamily::redundant);
    CHECK_THROWS_AS(parse_fixture_family("d"), ConfigError);
  }

  TEST_CASE("planted subset has the lowest entropy and beats the final layer") {
    FixtureConfig c;
    c.n_id = 500;
    c.n_ood = 500;
    const FixtureSet fx = generate_fixture(c);
    const ScoreTensor id = mcm_score(fx.id, 1.0);
    const ScoreTensor ood = mcm_score(fx.ood[0], 1.0);
    const SelectionResult r = select(id, enumerate_candidates(12, 4));
    CHECK(r.best == c.planted);
    const double base = fpr_at_tpr(id.column(11), ood.column(11)).fpr;
    const double fused = fpr_at_tpr(fuse(id, r.best), fuse(ood, r.best)).fpr;
    CHECK(base - fused >= 0.10);
  }

  TEST_CASE("redundant family separates at every layer") {
    FixtureConfig c;
    c.family = FixtureFamily::redundant;
    c.n_id = 300;
    c.n_ood = 300;
    const FixtureSet fx = generate_fixture(c);
    const ScoreTensor id = mcm_score(fx.id, 1.0);
    const ScoreTensor ood = mcm_score(fx.ood[0], 1.0);
    for (std::size_t l = 0; l < 12; ++l) {
      CHECK(auroc(id.column(l), ood.column(l)) > 0.8);
    }
  }
}
