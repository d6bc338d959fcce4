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

#include "layerfuse/tensor.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "layerfuse/errors.hpp"

namespace layerfuse {
namespace {

constexpr double kRowSumTolerance = 1e-6;

constexpr std::array<std::pair<ScoreRule, std::string_view>, 7> kRuleNames{{
    {ScoreRule::mcm, "mcm"},
    {ScoreRule::msp, "msp"},
    {ScoreRule::maxlogit, "maxlogit"},
    {ScoreRule::energy, "energy"},
    {ScoreRule::entropy, "entropy"},
    {ScoreRule::variance, "variance"},
    {ScoreRule::raw, "raw"},
}};

void fill_layer_names(TensorMeta& meta, std::size_t layers) {
  if (!meta.layer_names.empty()) return;
  meta.layer_names.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    meta.layer_names.push_back("layer_" + std::to_string(l));
  }
}

void check_size(std::size_t actual, std::size_t expected, const char* what) {
  if (actual != expected) {
    throw DomainError(std::string(what) + ": data has " +
                      std::to_string(actual) + " values, shape needs " +
                      std::to_string(expected));
  }
}

std::string coords(const std::vector<std::size_t>& where) {
  std::string out = "(";
  for (std::size_t i = 0; i < where.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(where[i]);
  }
  return out + ")";
}

ValidationReport check_meta(const TensorMeta& meta, std::size_t layers) {
  if (meta.layer_names.size() != layers) {
    return ValidationReport::fail(
        "layer-names",
        "layer_names has " + std::to_string(meta.layer_names.size()) +
            " entries for " + std::to_string(layers) + " layers");
  }
  if (!(meta.temperature > 0.0) || !std::isfinite(meta.temperature)) {
    return ValidationReport::fail("temperature",
                                  "temperature must be finite and > 0");
  }
  return ValidationReport::pass();
}

ValidationReport check_shape(std::initializer_list<std::size_t> dims) {
  for (std::size_t d : dims) {
    if (d == 0) return ValidationReport::fail("shape", "zero-sized dimension");
  }
  return ValidationReport::pass();
}

ValidationReport check_finite_cube(const detail::Cube& cube,
                                   std::size_t width) {
  for (std::size_t n = 0; n < cube.samples(); ++n) {
    for (std::size_t l = 0; l < cube.layers(); ++l) {
      auto row = cube.row(n, l);
      for (std::size_t c = 0; c < width; ++c) {
        if (!std::isfinite(row[c])) {
          return ValidationReport::fail("non-finite", "non-finite value",
                                        {n, l, c});
        }
      }
    }
  }
  return ValidationReport::pass();
}

}  // namespace

std::string_view to_string(ScoreRule rule) {
  for (const auto& [r, name] : kRuleNames) {
    if (r == rule) return name;
  }
  return "raw";
}

ScoreRule parse_score_rule(std::string_view name) {
  for (const auto& [r, n] : kRuleNames) {
    if (n == name) return r;
  }
  throw ConfigError("unknown score rule '" + std::string(name) + "'");
}

ScoreTensor::ScoreTensor(std::size_t samples, std::size_t layers,
                         std::vector<double> data, TensorMeta meta)
    : samples_(samples),
      layers_(layers),
      data_(std::move(data)),
      meta_(std::move(meta)) {
  check_size(data_.size(), samples * layers, "ScoreTensor");
  fill_layer_names(meta_, layers);
}

std::vector<double> ScoreTensor::column(std::size_t l) const {
  std::vector<double> out(samples_);
  for (std::size_t n = 0; n < samples_; ++n) out[n] = (*this)(n, l);
  return out;
}

namespace detail {

Cube::Cube(std::size_t samples, std::size_t layers, std::size_t width,
           std::vector<double> data, TensorMeta meta)
    : samples_(samples),
      layers_(layers),
      width_(width),
      data_(std::move(data)),
      meta_(std::move(meta)) {
  check_size(data_.size(), samples * layers * width, "tensor");
  fill_layer_names(meta_, layers);
}

}  // namespace detail

EmbeddingSet::EmbeddingSet(std::size_t samples, std::size_t layers,
                           std::size_t dim, std::vector<double> image,
                           std::size_t text_rows, std::size_t text_dim,
                           std::vector<double> text, TensorMeta meta)
    : image_(samples, layers, dim, std::move(image), std::move(meta)),
      dim_(dim),
      text_rows_(text_rows),
      text_dim_(text_dim),
      text_(std::move(text)) {
  check_size(text_.size(), text_rows * text_dim, "EmbeddingSet text");
}

ValidationReport ValidationReport::fail(std::string code, std::string message,
                                        std::vector<std::size_t> where) {
  ValidationReport r;
  r.ok = false;
  r.code = std::move(code);
  r.message = std::move(message);
  r.where = std::move(where);
  return r;
}

ValidationReport validate(const ScoreTensor& tensor) {
  if (auto r = check_shape({tensor.samples(), tensor.layers()}); !r.ok) {
    return r;
  }
  for (std::size_t n = 0; n < tensor.samples(); ++n) {
    for (std::size_t l = 0; l < tensor.layers(); ++l) {
      if (!std::isfinite(tensor(n, l))) {
        return ValidationReport::fail("non-finite", "non-finite score", {n, l});
      }
    }
  }
  return check_meta(tensor.meta(), tensor.layers());
}

ValidationReport validate(const ProbTensor& tensor) {
  if (auto r = check_shape({tensor.samples(), tensor.layers(),
                            tensor.classes()});
      !r.ok) {
    return r;
  }
  for (std::size_t n = 0; n < tensor.samples(); ++n) {
    for (std::size_t l = 0; l < tensor.layers(); ++l) {
      auto row = tensor.row(n, l);
      double sum = 0.0;
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (!std::isfinite(row[c])) {
          return ValidationReport::fail("non-finite", "non-finite probability",
                                        {n, l, c});
        }
        if (row[c] < 0.0 || row[c] > 1.0) {
          return ValidationReport::fail("range", "probability outside [0, 1]",
                                        {n, l, c});
        }
        sum += row[c];
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        return ValidationReport::fail(
            "row-sum", "probabilities sum to " + std::to_string(sum), {n, l});
      }
    }
  }
  return check_meta(tensor.meta(), tensor.layers());
}

ValidationReport validate(const RawLogits& tensor) {
  if (auto r = check_shape({tensor.samples(), tensor.layers(),
                            tensor.classes()});
      !r.ok) {
    return r;
  }
  if (auto r = check_finite_cube(tensor, tensor.classes()); !r.ok) return r;
  return check_meta(tensor.meta(), tensor.layers());
}

ValidationReport validate(const EmbeddingSet& tensor) {
  if (auto r = check_shape({tensor.samples(), tensor.layers(), tensor.dim(),
                            tensor.classes(), tensor.text_dim()});
      !r.ok) {
    return r;
  }
  if (tensor.dim() != tensor.text_dim()) {
    return ValidationReport::fail(
        "dim-mismatch", "image dim " + std::to_string(tensor.dim()) +
                            " != text dim " + std::to_string(tensor.text_dim()));
  }
  if (tensor.classes() < 2) {
    return ValidationReport::fail("class-count",
                                  "need at least 2 text embeddings");
  }
  auto image = tensor.image_data();
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!std::isfinite(image[i])) {
      std::size_t d = i % tensor.dim();
      std::size_t nl = i / tensor.dim();
      return ValidationReport::fail(
          "non-finite", "non-finite image embedding",
          {nl / tensor.layers(), nl % tensor.layers(), d});
    }
  }
  auto text = tensor.text_data();
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!std::isfinite(text[i])) {
      return ValidationReport::fail("non-finite", "non-finite text embedding",
                                    {i / tensor.text_dim(), i % tensor.text_dim()});
    }
  }
  return check_meta(tensor.meta(), tensor.layers());
}

template <class T>
void require_valid(const T& tensor) {
  ValidationReport report = validate(tensor);
  if (!report.ok) {
    throw ValidationError(report.code + ": " + report.message +
                          (report.where.empty() ? "" : " at " + coords(report.where)));
  }
}

template void require_valid(const ScoreTensor&);
template void require_valid(const ProbTensor&);
template void require_valid(const RawLogits&);
template void require_valid(const EmbeddingSet&);

ScoreTensor slice_layers(const ScoreTensor& tensor,
                         const LayerCombination& layers) {
  layers.require_in_range(tensor.layers());
  const std::size_t width = layers.size();
  std::vector<double> data(tensor.samples() * width);
  for (std::size_t n = 0; n < tensor.samples(); ++n) {
    for (std::size_t j = 0; j < width; ++j) {
      data[n * width + j] = tensor(n, layers.layers()[j]);
    }
  }
  TensorMeta meta = tensor.meta();
  meta.layer_names.clear();
  if (tensor.meta().layer_names.size() == tensor.layers()) {
    for (std::size_t l : layers) {
      meta.layer_names.push_back(tensor.meta().layer_names[l]);
    }
  }
  return ScoreTensor(tensor.samples(), width, std::move(data), std::move(meta));
}

}  // namespace layerfuse
