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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layerfuse/combination.hpp"

namespace layerfuse {

enum class ScoreRule { mcm, msp, maxlogit, energy, entropy, variance, raw };

std::string_view to_string(ScoreRule rule);
/// Throws ConfigError for unknown names.
ScoreRule parse_score_rule(std::string_view name);

struct TensorMeta {
  std::string model_id;
  std::string dataset_id;
  std::vector<std::string> layer_names;
  double temperature = 1.0;
  ScoreRule score_rule = ScoreRule::raw;
  // Fixed default keeps generated files byte-reproducible.
  std::string created_utc = "1970-01-01T00:00:00Z";

  friend bool operator==(const TensorMeta&, const TensorMeta&) = default;
};

/// Per-sample, per-layer scalar scores (N x L), row-major.
/// Orientation: larger means more in-distribution.
class ScoreTensor {
 public:
  /// Empty meta.layer_names are filled with "layer_<i>".
  /// Throws DomainError if data.size() != samples * layers.
  ScoreTensor(std::size_t samples, std::size_t layers, std::vector<double> data,
              TensorMeta meta = {});

  std::size_t samples() const { return samples_; }
  std::size_t layers() const { return layers_; }
  double operator()(std::size_t n, std::size_t l) const {
    return data_[n * layers_ + l];
  }
  std::span<const double> data() const { return data_; }
  std::span<const double> row(std::size_t n) const {
    return std::span<const double>(data_).subspan(n * layers_, layers_);
  }
  std::vector<double> column(std::size_t l) const;
  const TensorMeta& meta() const { return meta_; }

 private:
  std::size_t samples_;
  std::size_t layers_;
  std::vector<double> data_;
  TensorMeta meta_;
};

namespace detail {

// N x L x C row-major block shared by probabilities and logits.
class Cube {
 public:
  Cube(std::size_t samples, std::size_t layers, std::size_t width,
       std::vector<double> data, TensorMeta meta = {});

  std::size_t samples() const { return samples_; }
  std::size_t layers() const { return layers_; }
  double operator()(std::size_t n, std::size_t l, std::size_t c) const {
    return data_[(n * layers_ + l) * width_ + c];
  }
  std::span<const double> row(std::size_t n, std::size_t l) const {
    return std::span<const double>(data_).subspan((n * layers_ + l) * width_,
                                                  width_);
  }
  std::span<const double> data() const { return data_; }
  const TensorMeta& meta() const { return meta_; }

 protected:
  std::size_t width() const { return width_; }

 private:
  std::size_t samples_;
  std::size_t layers_;
  std::size_t width_;
  std::vector<double> data_;
  TensorMeta meta_;
};

}  // namespace detail

/// Class probability distributions per sample and layer (N x L x C).
class ProbTensor : public detail::Cube {
 public:
  using Cube::Cube;
  std::size_t classes() const { return width(); }
};

/// Unnormalized per-class logits (N x L x K), e.g. cosine similarities.
class RawLogits : public detail::Cube {
 public:
  using Cube::Cube;
  std::size_t classes() const { return width(); }
};

/// Per-layer image embeddings (N x L x D) with class text embeddings (K x D).
class EmbeddingSet {
 public:
  EmbeddingSet(std::size_t samples, std::size_t layers, std::size_t dim,
               std::vector<double> image, std::size_t text_rows,
               std::size_t text_dim, std::vector<double> text,
               TensorMeta meta = {});

  std::size_t samples() const { return image_.samples(); }
  std::size_t layers() const { return image_.layers(); }
  std::size_t dim() const { return dim_; }
  std::size_t classes() const { return text_rows_; }
  std::size_t text_dim() const { return text_dim_; }
  std::span<const double> image(std::size_t n, std::size_t l) const {
    return image_.row(n, l);
  }
  std::span<const double> text(std::size_t k) const {
    return std::span<const double>(text_).subspan(k * text_dim_, text_dim_);
  }
  std::span<const double> image_data() const { return image_.data(); }
  std::span<const double> text_data() const { return text_; }
  const TensorMeta& meta() const { return image_.meta(); }

 private:
  detail::Cube image_;
  std::size_t dim_;
  std::size_t text_rows_;
  std::size_t text_dim_;
  std::vector<double> text_;
};

/// Outcome of an invariant check. `where` holds the coordinates of the first
/// violation, in the tensor's own axis order.
struct ValidationReport {
  bool ok = true;
  std::string code;
  std::string message;
  std::vector<std::size_t> where;

  static ValidationReport pass() { return {}; }
  static ValidationReport fail(std::string code, std::string message,
                               std::vector<std::size_t> where = {});
};

ValidationReport validate(const ScoreTensor& tensor);
ValidationReport validate(const ProbTensor& tensor);
ValidationReport validate(const RawLogits& tensor);
ValidationReport validate(const EmbeddingSet& tensor);

/// Throws ValidationError carrying the report's code and coordinates.
template <class T>
void require_valid(const T& tensor);

/// Columns of `tensor` listed in `layers`, in ascending order.
/// Throws DomainError on an out-of-range index.
ScoreTensor slice_layers(const ScoreTensor& tensor,
                         const LayerCombination& layers);

}  // namespace layerfuse
