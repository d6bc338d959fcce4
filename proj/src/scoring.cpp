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
#include "layerfuse/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "layerfuse/errors.hpp"

namespace layerfuse {
namespace {

void require_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be finite and > 0, got " +
                      std::to_string(temperature));
  }
}

TensorMeta scored_meta(const TensorMeta& source, ScoreRule rule,
                       double temperature) {
  TensorMeta meta = source;
  meta.score_rule = rule;
  meta.temperature = temperature;
  return meta;
}

// Applies row_fn to every (n, l) class row of a cube.
template <class Cube, class RowFn>
ScoreTensor reduce_rows(const Cube& cube, TensorMeta meta, Exec exec,
                        RowFn row_fn) {
  const std::size_t samples = cube.samples();
  const std::size_t layers = cube.layers();
  std::vector<double> out(samples * layers);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t l = 0; l < layers; ++l) {
      out[n * layers + l] = row_fn(cube.row(n, l));
    }
  }
  return ScoreTensor(samples, layers, std::move(out), std::move(meta));
}

double row_max(std::span<const double> row) {
  return *std::max_element(row.begin(), row.end());
}

double neg_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return -h;
}

double spread_about_uniform(std::span<const double> p) {
  const double mean = 1.0 / static_cast<double>(p.size());
  double s = 0.0;
  for (double v : p) s += v * (v - mean) * (v - mean);
  return s;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

RawLogits cosine_logits(const EmbeddingSet& emb, Exec exec) {
  if (emb.dim() != emb.text_dim()) {
    throw DomainError("image dim " + std::to_string(emb.dim()) +
                      " != text dim " + std::to_string(emb.text_dim()));
  }
  const std::size_t samples = emb.samples();
  const std::size_t layers = emb.layers();
  const std::size_t classes = emb.classes();
  const std::size_t dim = emb.dim();

  std::vector<double> text_norm(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    text_norm[k] = norm(emb.text(k));
    if (text_norm[k] == 0.0) {
      throw DomainError("zero-norm text embedding at k=" + std::to_string(k));
    }
  }
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t l = 0; l < layers; ++l) {
      if (norm(emb.image(n, l)) == 0.0) {
        throw DomainError("zero-norm image embedding at (n, l)=(" +
                          std::to_string(n) + ", " + std::to_string(l) + ")");
      }
    }
  }

  std::vector<double> out(samples * layers * classes);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t l = 0; l < layers; ++l) {
      auto image = emb.image(n, l);
      const double image_norm = norm(image);
      for (std::size_t k = 0; k < classes; ++k) {
        auto text = emb.text(k);
        double dot = 0.0;
        for (std::size_t d = 0; d < dim; ++d) dot += image[d] * text[d];
        out[(n * layers + l) * classes + k] =
            std::clamp(dot / (image_norm * text_norm[k]), -1.0, 1.0);
      }
    }
  }
  return RawLogits(samples, layers, classes, std::move(out),
                   scored_meta(emb.meta(), ScoreRule::raw, emb.meta().temperature));
}

ProbTensor softmax(const RawLogits& logits, double temperature, Exec exec) {
  require_temperature(temperature);
  const std::size_t samples = logits.samples();
  const std::size_t layers = logits.layers();
  const std::size_t classes = logits.classes();
  std::vector<double> out(samples * layers * classes);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t l = 0; l < layers; ++l) {
      auto row = logits.row(n, l);
      double* dst = &out[(n * layers + l) * classes];
      const double top = row_max(row);
      double sum = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        dst[c] = std::exp((row[c] - top) / temperature);
        sum += dst[c];
      }
      for (std::size_t c = 0; c < classes; ++c) dst[c] /= sum;
    }
  }
  return ProbTensor(samples, layers, classes, std::move(out),
                    scored_meta(logits.meta(), ScoreRule::raw, temperature));
}

ScoreTensor mcm_score(const RawLogits& logits, double temperature, Exec exec) {
  require_temperature(temperature);
  if (logits.classes() < 2) {
    throw DomainError("mcm_score needs at least 2 classes");
  }
  // max_k softmax_k = exp(0) / sum_k exp((z_k - z_max) / t)
  return reduce_rows(
      logits, scored_meta(logits.meta(), ScoreRule::mcm, temperature), exec,
      [temperature](std::span<const double> row) {
        const double top = row_max(row);
        double sum = 0.0;
        for (double z : row) sum += std::exp((z - top) / temperature);
        return 1.0 / sum;
      });
}

ScoreTensor msp_score(const ProbTensor& probs) {
  return reduce_rows(
      probs,
      scored_meta(probs.meta(), ScoreRule::msp, probs.meta().temperature),
      Exec::serial, row_max);
}

ScoreTensor maxlogit_score(const RawLogits& logits) {
  return reduce_rows(logits,
                     scored_meta(logits.meta(), ScoreRule::maxlogit,
                                 logits.meta().temperature),
                     Exec::serial, row_max);
}

ScoreTensor energy_score(const RawLogits& logits, double temperature,
                         Exec exec) {
  require_temperature(temperature);
  return reduce_rows(
      logits, scored_meta(logits.meta(), ScoreRule::energy, temperature), exec,
      [temperature](std::span<const double> row) {
        const double top = row_max(row) / temperature;
        double sum = 0.0;
        for (double z : row) sum += std::exp(z / temperature - top);
        return -(top + std::log(sum));
      });
}

ScoreTensor entropy_score(const ProbTensor& probs) {
  return reduce_rows(
      probs,
      scored_meta(probs.meta(), ScoreRule::entropy, probs.meta().temperature),
      Exec::serial, neg_entropy);
}

ScoreTensor variance_score(const ProbTensor& probs) {
  return reduce_rows(
      probs,
      scored_meta(probs.meta(), ScoreRule::variance, probs.meta().temperature),
      Exec::serial, spread_about_uniform);
}

ScoreTensor score(const RawLogits& logits, const ScoreRuleConfig& config,
                  Exec exec) {
  require_temperature(config.temperature);
  switch (config.rule) {
    case ScoreRule::mcm:
      return mcm_score(logits, config.temperature, exec);
    case ScoreRule::maxlogit:
      return maxlogit_score(logits);
    case ScoreRule::energy:
      return energy_score(logits, config.temperature, exec);
    case ScoreRule::msp:
    case ScoreRule::entropy:
    case ScoreRule::variance:
      return score(softmax(logits, config.temperature, exec), config);
    case ScoreRule::raw:
      break;
  }
  throw ConfigError("score rule '" + std::string(to_string(config.rule)) +
                    "' cannot be applied to logits");
}

ScoreTensor score(const ProbTensor& probs, const ScoreRuleConfig& config) {
  switch (config.rule) {
    case ScoreRule::mcm:
    case ScoreRule::msp:
      return msp_score(probs);
    case ScoreRule::entropy:
      return entropy_score(probs);
    case ScoreRule::variance:
      return variance_score(probs);
    default:
      throw ConfigError("score rule '" + std::string(to_string(config.rule)) +
                        "' needs logits, not probabilities");
  }
}

}  // namespace layerfuse
