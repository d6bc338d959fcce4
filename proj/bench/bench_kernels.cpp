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

// Serial vs OpenMP timings for the data-parallel kernels. Arg 0 selects the
// execution policy (0 = serial, 1 = parallel).

#include <benchmark/benchmark.h>

#include "layerfuse/analysis.hpp"
#include "layerfuse/fixtures.hpp"
#include "layerfuse/rng.hpp"
#include "layerfuse/scoring.hpp"
#include "layerfuse/selection.hpp"

namespace {

using namespace layerfuse;

Exec policy(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

const FixtureSet& fixture() {
  static const FixtureSet set = [] {
    FixtureConfig config;
    config.seed = 7;
    config.n_id = 2000;
    config.n_ood = 2000;
    return generate_fixture(config);
  }();
  return set;
}

void BM_Select(benchmark::State& state) {
  const ScoreTensor scores = mcm_score(fixture().id, 1.0);
  const CandidateSet candidates = enumerate_candidates(scores.layers(), 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(select(scores, candidates, {}, policy(state)));
  }
  state.SetItemsProcessed(state.iterations() * candidates.combos.size());
}
BENCHMARK(BM_Select)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OracleSearch(benchmark::State& state) {
  const ScoreTensor id = mcm_score(fixture().id, 1.0);
  std::vector<ScoreTensor> ood;
  for (const auto& o : fixture().ood) ood.push_back(mcm_score(o, 1.0));
  const CandidateSet candidates = enumerate_candidates(id.layers(), 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle_search(id, ood, candidates, policy(state)));
  }
}
BENCHMARK(BM_OracleSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_McmScore(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mcm_score(fixture().id, 1.0, policy(state)));
  }
}
BENCHMARK(BM_McmScore)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CosineLogits(benchmark::State& state) {
  const std::size_t n = 512, layers = 12, dim = 256, classes = 100;
  SplitMix64 rng(3);
  std::vector<double> image(n * layers * dim), text(classes * dim);
  for (double& v : image) v = rng.gaussian();
  for (double& v : text) v = rng.gaussian();
  const EmbeddingSet emb(n, layers, dim, image, classes, dim, text);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cosine_logits(emb, policy(state)));
  }
}
BENCHMARK(BM_CosineLogits)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_JsdMatrix(benchmark::State& state) {
  const ProbTensor probs = softmax(fixture().id, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(jsd_matrix(probs, policy(state)));
  }
}
BENCHMARK(BM_JsdMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
