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

#include "layerfuse/projection.hpp"

#include <cmath>
#include <string>

#include "layerfuse/errors.hpp"
#include "layerfuse/rng.hpp"

namespace layerfuse {

FeatureMap::FeatureMap(std::size_t channels, std::size_t height,
                       std::size_t width, std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  if (channels == 0 || height == 0 || width == 0) {
    throw DomainError("feature map dimensions must be >= 1");
  }
  if (data_.size() != channels * height * width) {
    throw DomainError("feature map data has " + std::to_string(data_.size()) +
                      " values, shape needs " +
                      std::to_string(channels * height * width));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw DomainError("non-finite feature map value");
  }
}

std::string_view to_string(ProjectionInit init) {
  return init == ProjectionInit::he ? "he" : "xavier";
}

ProjectionInit parse_projection_init(std::string_view name) {
  if (name == "he") return ProjectionInit::he;
  if (name == "xavier") return ProjectionInit::xavier;
  throw ConfigError("unknown projection init '" + std::string(name) + "'");
}

FeatureMap adaptive_avg_pool(const FeatureMap& f, std::size_t target_h,
                             std::size_t target_w) {
  if (target_h == 0 || target_w == 0) {
    throw ConfigError("pooling targets must be >= 1");
  }
  const std::size_t h_in = f.height();
  const std::size_t w_in = f.width();
  std::vector<double> out(f.channels() * target_h * target_w);
  for (std::size_t c = 0; c < f.channels(); ++c) {
    for (std::size_t i = 0; i < target_h; ++i) {
      const std::size_t h0 = i * h_in / target_h;
      const std::size_t h1 = ((i + 1) * h_in + target_h - 1) / target_h;
      for (std::size_t j = 0; j < target_w; ++j) {
        const std::size_t w0 = j * w_in / target_w;
        const std::size_t w1 = ((j + 1) * w_in + target_w - 1) / target_w;
        double sum = 0.0;
        for (std::size_t h = h0; h < h1; ++h) {
          for (std::size_t w = w0; w < w1; ++w) sum += f(c, h, w);
        }
        out[(c * target_h + i) * target_w + j] =
            sum / static_cast<double>((h1 - h0) * (w1 - w0));
      }
    }
  }
  return FeatureMap(f.channels(), target_h, target_w, std::move(out));
}

std::vector<double> projection_matrix(std::size_t c_in, std::size_t c_target,
                                      std::uint64_t seed, ProjectionInit init) {
  if (c_in == 0 || c_target == 0) {
    throw ConfigError("projection dimensions must be >= 1");
  }
  const double fan = init == ProjectionInit::he
                         ? static_cast<double>(c_in)
                         : static_cast<double>(c_in + c_target);
  const double stddev = std::sqrt(2.0 / fan);
  SplitMix64 rng(seed);
  std::vector<double> weights(c_target * c_in);
  for (double& w : weights) w = stddev * rng.gaussian();
  return weights;
}

std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer_index) {
  return seed ^ static_cast<std::uint64_t>(layer_index);
}

FeatureMap apply_channel_projection(const FeatureMap& f,
                                    std::span<const double> weights,
                                    std::size_t c_out, Exec exec) {
  const std::size_t c_in = f.channels();
  if (weights.size() != c_out * c_in) {
    throw DomainError("projection matrix is not " + std::to_string(c_out) +
                      " x " + std::to_string(c_in));
  }
  const std::size_t pixels = f.height() * f.width();
  const auto in = f.data();
  std::vector<double> out(c_out * pixels, 0.0);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::size_t r = 0; r < c_out; ++r) {
    double* dst = &out[r * pixels];
    for (std::size_t c = 0; c < c_in; ++c) {
      const double w = weights[r * c_in + c];
      const double* src = &in[c * pixels];
      for (std::size_t p = 0; p < pixels; ++p) dst[p] += w * src[p];
    }
  }
  return FeatureMap(c_out, f.height(), f.width(), std::move(out));
}

FeatureMap random_channel_projection(const FeatureMap& f,
                                     const ProjectionSpec& spec,
                                     std::size_t layer_index, Exec exec) {
  const std::vector<double> weights =
      projection_matrix(f.channels(), spec.c_target,
                        layer_seed(spec.seed, layer_index), spec.init);
  return apply_channel_projection(f, weights, spec.c_target, exec);
}

FeatureMap harmonize(const FeatureMap& f, const ProjectionSpec& spec,
                     std::size_t layer_index, Exec exec) {
  return random_channel_projection(
      adaptive_avg_pool(f, spec.target_h, spec.target_w), spec, layer_index,
      exec);
}

}  // namespace layerfuse
