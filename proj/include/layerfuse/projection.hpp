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
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "layerfuse/exec.hpp"

namespace layerfuse {

/// Channel-major feature map, C x H x W.
class FeatureMap {
 public:
  /// Throws DomainError on a zero dimension, size mismatch or non-finite value.
  FeatureMap(std::size_t channels, std::size_t height, std::size_t width,
             std::vector<double> data);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  double operator()(std::size_t c, std::size_t h, std::size_t w) const {
    return data_[(c * height_ + h) * width_ + w];
  }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t channels_;
  std::size_t height_;
  std::size_t width_;
  std::vector<double> data_;
};

enum class ProjectionInit { he, xavier };

std::string_view to_string(ProjectionInit init);
ProjectionInit parse_projection_init(std::string_view name);

struct ProjectionSpec {
  std::size_t target_h = 1;
  std::size_t target_w = 1;
  std::size_t c_target = 1;
  std::uint64_t seed = 0;
  ProjectionInit init = ProjectionInit::he;
};

/// Output cell (i, j) averages input rows [floor(i H / th), ceil((i+1) H / th))
/// and the matching column range. Throws ConfigError for zero targets.
FeatureMap adaptive_avg_pool(const FeatureMap& f, std::size_t target_h,
                             std::size_t target_w);

/// Row-major c_target x c_in Gaussian matrix. Entries are drawn in row-major
/// order from SplitMix64(seed), one gaussian() each, scaled by the init's
/// standard deviation:
///   he      sqrt(2 / c_in)
///   xavier  sqrt(2 / (c_in + c_target))
std::vector<double> projection_matrix(std::size_t c_in, std::size_t c_target,
                                      std::uint64_t seed, ProjectionInit init);

/// Seed used for a given layer: spec.seed XOR layer_index.
std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer_index);

/// Applies `weights` (c_out x C, row-major) to every spatial location.
FeatureMap apply_channel_projection(const FeatureMap& f,
                                    std::span<const double> weights,
                                    std::size_t c_out,
                                    Exec exec = Exec::parallel);

/// 1x1 random projection of the channels with the matrix drawn for
/// `layer_index`. Spatial size is unchanged.
FeatureMap random_channel_projection(const FeatureMap& f,
                                     const ProjectionSpec& spec,
                                     std::size_t layer_index = 0,
                                     Exec exec = Exec::parallel);

/// Pool to (target_h, target_w), then project to c_target channels.
FeatureMap harmonize(const FeatureMap& f, const ProjectionSpec& spec,
                     std::size_t layer_index = 0, Exec exec = Exec::parallel);

}  // namespace layerfuse
