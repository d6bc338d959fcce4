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
#include "layerfuse/errors.hpp"
#include "layerfuse/projection.hpp"
#include "oracles.hpp"

using namespace layerfuse;

namespace {

FeatureMap random_map(SplitMix64& rng, std::size_t c, std::size_t h, std::size_t w) {
  std::vector<double> d(c * h * w);
  for (double& v : d) v = rng.gaussian();
  return FeatureMap(c, h, w, std::move(d));
}

double sq_norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_SUITE("projection") {
  TEST_CASE("adaptive average pooling") {
    SplitMix64 rng(1);
    const FeatureMap f = random_map(rng, 3, 5, 7);
    const FeatureMap same = adaptive_avg_pool(f, 5, 7);
    CHECK(std::equal(same.data().begin(), same.data().end(), f.data().begin()));
    CHECK(adaptive_avg_pool(FeatureMap(1, 2, 2, {1, 2, 3, 4}), 1, 1)(0, 0, 0) == 2.5);
    const FeatureMap col = adaptive_avg_pool(FeatureMap(1, 4, 1, {1, 2, 3, 4}), 2, 1);
    CHECK(col(0, 0, 0) == 1.5);
    CHECK(col(0, 1, 0) == 3.5);
    // 5 -> 3 uses overlapping windows [0,2), [1,4), [3,5).
    const FeatureMap odd = adaptive_avg_pool(FeatureMap(1, 5, 1, {1, 2, 3, 4, 5}), 3, 1);
    CHECK(odd(0, 0, 0) == 1.5);
    CHECK(odd(0, 1, 0) == 3.0);
    CHECK(odd(0, 2, 0) == 4.5);
    CHECK_THROWS_AS(adaptive_avg_pool(f, 0, 1), ConfigError);
    CHECK_THROWS_AS(FeatureMap(1, 1, 2, {1.0}), DomainError);
  }

  TEST_CASE("identity and zero inputs") {
    SplitMix64 rng(2);
    const FeatureMap f = random_map(rng, 4, 3, 3);
    std::vector<double> eye(16, 0.0);
    for (int i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
    const FeatureMap out = apply_channel_projection(f, eye, 4);
    CHECK(std::equal(out.data().begin(), out.data().end(), f.data().begin()));
    CHECK_THROWS_AS(apply_channel_projection(f, eye, 3), DomainError);

    const FeatureMap zero(8, 2, 2, std::vector<double>(32, 0.0));
    const FeatureMap pz = random_channel_projection(zero, {1, 1, 5, 7});
    for (double v : pz.data()) CHECK(v == 0.0);
    CHECK(pz.channels() == 5);
  }

  TEST_CASE("matrix is deterministic and row-major from the seeded stream") {
    const auto a = projection_matrix(6, 4, 99, ProjectionInit::he);
    CHECK(a == projection_matrix(6, 4, 99, ProjectionInit::he));
    CHECK(a != projection_matrix(6, 4, 98, ProjectionInit::he));
    SplitMix64 rng(99);
    const double sd = std::sqrt(2.0 / 6);
    for (double w : a) CHECK(w == sd * rng.gaussian());
    const auto x = projection_matrix(6, 4, 99, ProjectionInit::xavier);
    CHECK(x[0] == doctest::Approx(a[0] * std::sqrt(6.0 / 10)).epsilon(1e-15));
    CHECK(layer_seed(8, 3) == 11);
    CHECK(parse_projection_init("xavier") == ProjectionInit::xavier);
    CHECK_THROWS_AS(parse_projection_init("orthogonal"), ConfigError);
  }

  TEST_CASE("pooling and projecting commute") {
    SplitMix64 rng(3);
    const FeatureMap f = random_map(rng, 16, 9, 7);
    const ProjectionSpec spec{3, 2, 10, 5, ProjectionInit::he};
    const FeatureMap a = harmonize(f, spec);
    const FeatureMap b =
        adaptive_avg_pool(random_channel_projection(f, spec), spec.target_h, spec.target_w);
    REQUIRE(a.data().size() == b.data().size());
    for (std::size_t i = 0; i < a.data().size(); ++i) {
      CHECK(std::abs(a.data()[i] - b.data()[i]) < 1e-12);
    }
  }

  TEST_CASE("serial and parallel projection agree") {
    SplitMix64 rng(4);
    const FeatureMap f = random_map(rng, 32, 4, 4);
    const ProjectionSpec spec{4, 4, 20, 7, ProjectionInit::xavier};
    const FeatureMap a = random_channel_projection(f, spec, 2, Exec::serial);
    const FeatureMap b = random_channel_projection(f, spec, 2, Exec::parallel);
    CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  }

  TEST_CASE("expected squared-norm gain over many seeds") {
    SplitMix64 rng(5);
    const std::size_t c_in = 640, c_out = 256;
    const FeatureMap x = random_map(rng, c_in, 1, 1);
    const double in = sq_norm(x.data());
    for (ProjectionInit init : {ProjectionInit::xavier, ProjectionInit::he}) {
      const double fan = init == ProjectionInit::he ? c_in : c_in + c_out;
      const double expected = static_cast<double>(c_out) * 2.0 / fan;
      double mean = 0;
      for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const FeatureMap y = random_channel_projection(x, {1, 1, c_out, seed, init});
        mean += sq_norm(y.data()) / in;
      }
      mean /= 1000;
      CAPTURE(to_string(init));
      CHECK(std::abs(mean / expected - 1.0) < 0.05);
    }
  }

  TEST_CASE("distance distortion shrinks as the target width grows") {
    SplitMix64 rng(6);
    const std::size_t c_in = 640;
    std::vector<FeatureMap> xs;
    for (int i = 0; i < 40; ++i) xs.push_back(random_map(rng, c_in, 1, 1));
    auto distortion = [&](std::size_t c_out) {
      const double gain = std::sqrt(static_cast<double>(c_out) * 2.0 / c_in);
      std::vector<double> d;
      for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
        std::vector<double> diff(c_in);
        for (std::size_t c = 0; c < c_in; ++c) diff[c] = xs[i].data()[c] - xs[i + 1].data()[c];
        const FeatureMap f(c_in, 1, 1, diff);
        const FeatureMap p = random_channel_projection(f, {1, 1, c_out, 17});
        d.push_back(std::abs(std::sqrt(sq_norm(p.data()) / sq_norm(f.data())) / gain - 1.0));
      }
      return median(d);
    };
    CHECK(distortion(512) < distortion(64));
  }
}
