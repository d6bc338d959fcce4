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

#include "layerfuse/exec.hpp"
#include "layerfuse/tensor.hpp"

namespace layerfuse {

/// A scoring rule plus its softmax temperature.
struct ScoreRuleConfig {
  ScoreRule rule = ScoreRule::mcm;
  double temperature = 1.0;
};

/// logits[n, l, k] = cos(image[n, l], text[k]).
/// Throws DomainError naming the zero-norm image (n, l) or text row k.
RawLogits cosine_logits(const EmbeddingSet& emb, Exec exec = Exec::parallel);

/// Row-wise softmax(logits / temperature), max-subtracted.
ProbTensor softmax(const RawLogits& logits, double temperature,
                   Exec exec = Exec::parallel);

/// Maximum concept matching: max_k softmax(logits / temperature)_k.
ScoreTensor mcm_score(const RawLogits& logits, double temperature,
                      Exec exec = Exec::parallel);
ScoreTensor msp_score(const ProbTensor& probs);
ScoreTensor maxlogit_score(const RawLogits& logits);
/// -log sum_k exp(logits_k / temperature), via log-sum-exp.
ScoreTensor energy_score(const RawLogits& logits, double temperature = 1.0,
                         Exec exec = Exec::parallel);
/// Negated Shannon entropy (natural log), so confident rows score higher.
ScoreTensor entropy_score(const ProbTensor& probs);
/// sum_c p_c (p_c - 1/C)^2.
ScoreTensor variance_score(const ProbTensor& probs);

/// Applies any rule to logits. Probability-based rules (msp, entropy,
/// variance) first take softmax(logits / temperature).
ScoreTensor score(const RawLogits& logits, const ScoreRuleConfig& config,
                  Exec exec = Exec::parallel);
/// Probability-based rules only; mcm is treated as msp. Other rules need
/// logits and throw ConfigError.
ScoreTensor score(const ProbTensor& probs, const ScoreRuleConfig& config);

}  // namespace layerfuse
