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

#include "layerfuse/fixtures.hpp"

#include <string>

#include "layerfuse/errors.hpp"
#include "layerfuse/rng.hpp"

namespace layerfuse {
namespace {

constexpr double kRedundantNoise = 0.1;
constexpr double kFlatNoise = 0.01;

// Per-sample margins for all layers; the sample's class gets the margin on
// top of small per-class noise.
class LogitWriter {
 public:
  LogitWriter(std::size_t samples, std::size_t layers, std::size_t classes)
      : layers_(layers), classes_(classes), data_(samples * layers * classes) {}

  void write(std::size_t n, std::size_t l, std::size_t label, double margin,
             double noise, SplitMix64& rng) {
    double* row = &data_[(n * layers_ + l) * classes_];
    for (std::size_t c = 0; c < classes_; ++c) row[c] = noise * rng.gaussian();
    row[label] += margin;
  }

  RawLogits finish(std::size_t samples, const FixtureConfig& config,
                   std::string dataset_id) && {
    TensorMeta meta;
    meta.model_id = "fixture-" + std::string(to_string(config.family));
    meta.dataset_id = std::move(dataset_id);
    return RawLogits(samples, layers_, classes_, std::move(data_), std::move(meta));
  }

 private:
  std::size_t layers_;
  std::size_t classes_;
  std::vector<double> data_;
};

// Layers outside the planted subset look the same for ID and OOD inputs.
double uninformative_margin(const FixtureConfig& config, SplitMix64& rng) {
  return rng.uniform(config.low_margin - config.ood_spread, config.high_margin);
}

RawLogits complementary_id(const FixtureConfig& config, SplitMix64& rng) {
  const auto& planted = config.planted.layers();
  LogitWriter out(config.n_id, config.layers, config.classes);
  for (std::size_t n = 0; n < config.n_id; ++n) {
    const std::size_t label = rng.index(config.classes);
    const bool hard = rng.uniform() < config.hard_fraction;
    const std::size_t owner = planted[rng.index(planted.size())];
    for (std::size_t l = 0; l < config.layers; ++l) {
      double margin;
      if (hard) {
        margin = 0.0;
      } else if (config.planted.contains(l)) {
        margin = l == owner ? config.high_margin : config.low_margin;
      } else {
        margin = uninformative_margin(config, rng);
      }
      out.write(n, l, label, margin, config.id_noise, rng);
    }
  }
  return std::move(out).finish(config.n_id, config, "id");
}

RawLogits complementary_ood(const FixtureConfig& config, std::size_t set,
                            SplitMix64& rng) {
  // Later sets sit slightly lower so the sets are not exchangeable.
  const double center = config.low_margin - 0.25 * config.ood_spread *
                                                static_cast<double>(set);
  LogitWriter out(config.n_ood, config.layers, config.classes);
  for (std::size_t n = 0; n < config.n_ood; ++n) {
    const std::size_t label = rng.index(config.classes);
    for (std::size_t l = 0; l < config.layers; ++l) {
      const double margin =
          config.planted.contains(l)
              ? rng.uniform(center - config.ood_spread, center + config.ood_spread)
              : uninformative_margin(config, rng);
      out.write(n, l, label, margin, config.id_noise, rng);
    }
  }
  return std::move(out).finish(config.n_ood, config, "ood" + std::to_string(set));
}

RawLogits redundant(const FixtureConfig& config, std::size_t samples,
                    double lo, double hi, std::string name, SplitMix64& rng) {
  LogitWriter out(samples, config.layers, config.classes);
  for (std::size_t n = 0; n < samples; ++n) {
    const std::size_t label = rng.index(config.classes);
    const double latent = rng.uniform(lo, hi);
    for (std::size_t l = 0; l < config.layers; ++l) {
      out.write(n, l, label, latent + kRedundantNoise * rng.gaussian(),
                config.id_noise, rng);
    }
  }
  return std::move(out).finish(samples, config, std::move(name));
}

RawLogits flat(const FixtureConfig& config, std::size_t samples,
               std::string name, SplitMix64& rng) {
  LogitWriter out(samples, config.layers, config.classes);
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t l = 0; l < config.layers; ++l) {
      out.write(n, l, 0, 0.0, kFlatNoise, rng);
    }
  }
  return std::move(out).finish(samples, config, std::move(name));
}

}  // namespace

std::string_view to_string(FixtureFamily family) {
  switch (family) {
    case FixtureFamily::complementary:
      return "complementary";
    case FixtureFamily::redundant:
      return "redundant";
    case FixtureFamily::flat:
      return "flat";
  }
  return "complementary";
}

FixtureFamily parse_fixture_family(std::string_view name) {
  if (name == "complementary" || name == "a") return FixtureFamily::complementary;
  if (name == "redundant" || name == "b") return FixtureFamily::redundant;
  if (name == "flat" || name == "c") return FixtureFamily::flat;
  throw ConfigError("unknown fixture family '" + std::string(name) + "'");
}

void FixtureConfig::require_valid() const {
  if (n_id < 2 || n_ood < 1 || ood_sets < 1 || layers < 1 || classes < 2) {
    throw ConfigError("fixture needs n_id >= 2, n_ood >= 1, ood_sets >= 1, "
                      "layers >= 1 and classes >= 2");
  }
  try {
    planted.require_valid_for(layers);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("planted subset: ") + e.what());
  }
  if (!(hard_fraction >= 0.0 && hard_fraction < 1.0) || !(ood_spread >= 0.0) ||
      !(id_noise >= 0.0)) {
    throw ConfigError("fixture noise parameters out of range");
  }
}

FixtureSet generate_fixture(const FixtureConfig& config) {
  config.require_valid();
  SplitMix64 rng(config.seed);
  auto make_id = [&]() -> RawLogits {
    switch (config.family) {
      case FixtureFamily::complementary:
        return complementary_id(config, rng);
      case FixtureFamily::redundant:
        return redundant(config, config.n_id, 2.0, 6.0, "id", rng);
      case FixtureFamily::flat:
        break;
    }
    return flat(config, config.n_id, "id", rng);
  };
  FixtureSet set{config, make_id(), {}};
  for (std::size_t s = 0; s < config.ood_sets; ++s) {
    const std::string name = "ood" + std::to_string(s);
    switch (config.family) {
      case FixtureFamily::complementary:
        set.ood.push_back(complementary_ood(config, s, rng));
        break;
      case FixtureFamily::redundant:
        set.ood.push_back(redundant(config, config.n_ood, 0.0, 3.0, name, rng));
        break;
      case FixtureFamily::flat:
        set.ood.push_back(flat(config, config.n_ood, name, rng));
        break;
    }
  }
  return set;
}

}  // namespace layerfuse
