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

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "layerfuse/analysis.hpp"
#include "layerfuse/errors.hpp"
#include "layerfuse/fixtures.hpp"
#include "layerfuse/io.hpp"
#include "layerfuse/metrics.hpp"
#include "layerfuse/scoring.hpp"
#include "layerfuse/selection.hpp"

namespace layerfuse::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string id_path;
  std::vector<std::string> ood_paths;
  std::size_t bins = 32;
  std::size_t max_len = 5;
  double temperature = 1.0;
  std::string rule = "mcm";
  std::string heuristic = "entropy";
  std::string range_mode = "empirical_minmax";
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;
  std::string combo;
  std::size_t top_k = 10;
  std::string jaccard_out;
  // analyze
  std::string kind;
  std::string input;
  double var_keep = 0.99;
  // fixtures
  std::string family = "complementary";
  std::size_t n_id = 1000;
  std::size_t n_ood = 1000;
  std::size_t ood_sets = 2;
  std::size_t layers = 12;
  std::size_t classes = 50;
  std::string planted = "2,5,11";
  std::string dtype = "f64";
};

ScoreTensor load_scores(const std::string& path, const ScoreRuleConfig& rule) {
  if (fs::path(path).extension() == ".csv") return read_csv_scores(path);
  LoadedTensor loaded = read_tensor(path);
  return std::visit(
      [&](auto& t) -> ScoreTensor {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ScoreTensor>) {
          return t;
        } else if constexpr (std::is_same_v<T, RawLogits>) {
          return score(t, rule);
        } else if constexpr (std::is_same_v<T, ProbTensor>) {
          return score(t, rule);
        } else {
          return score(cosine_logits(t), rule);
        }
      },
      loaded.tensor);
}

ProbTensor load_probs(const std::string& path, double temperature) {
  LoadedTensor loaded = read_tensor(path);
  return std::visit(
      [&](auto& t) -> ProbTensor {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ProbTensor>) {
          return t;
        } else if constexpr (std::is_same_v<T, RawLogits>) {
          return softmax(t, temperature);
        } else if constexpr (std::is_same_v<T, EmbeddingSet>) {
          return softmax(cosine_logits(t), temperature);
        } else {
          throw ConfigError(path + ": class distributions need a logits, probs "
                                   "or embeddings file, not scores");
        }
      },
      loaded.tensor);
}

std::vector<Eigen::MatrixXd> load_activations(const std::string& path) {
  std::vector<Eigen::MatrixXd> acts;
  auto to_eigen = [](const NumericMatrix& m) {
    Eigen::MatrixXd out(m.rows, m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = m.data[r * m.cols + c];
    }
    return out;
  };
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FormatError(path + ": no .csv activation files");
    for (const auto& f : files) acts.push_back(to_eigen(read_csv_matrix(f)));
    return acts;
  }
  LoadedTensor loaded = read_tensor(path);
  const auto* emb = std::get_if<EmbeddingSet>(&loaded.tensor);
  if (emb == nullptr) {
    throw ConfigError(path + ": activations need a directory of CSV files or "
                             "an embeddings tensor file");
  }
  for (std::size_t l = 0; l < emb->layers(); ++l) {
    Eigen::MatrixXd m(emb->samples(), emb->dim());
    for (std::size_t n = 0; n < emb->samples(); ++n) {
      auto row = emb->image(n, l);
      for (std::size_t d = 0; d < emb->dim(); ++d) m(n, d) = row[d];
    }
    acts.push_back(std::move(m));
  }
  return acts;
}

struct Inputs {
  ScoreTensor id;
  std::map<std::string, ScoreTensor> ood;

  std::vector<ScoreTensor> ood_list() const {
    std::vector<ScoreTensor> out;
    for (const auto& [name, t] : ood) out.push_back(t);
    return out;
  }
};

Inputs load_inputs(const Options& o, bool need_ood) {
  if (o.id_path.empty()) throw ConfigError("--id is required");
  if (need_ood && o.ood_paths.empty()) throw ConfigError("at least one --ood is required");
  const ScoreRuleConfig rule{parse_score_rule(o.rule), o.temperature};
  Inputs in{load_scores(o.id_path, rule), {}};
  for (const auto& p : o.ood_paths) {
    const std::string name = fs::path(p).stem().string();
    if (!in.ood.emplace(name, load_scores(p, rule)).second) {
      throw ConfigError("duplicate OOD dataset name '" + name + "'");
    }
  }
  return in;
}

ReportFormat output_format(const Options& o, ReportFormat fallback) {
  if (!o.format.empty()) return parse_report_format(o.format);
  if (!o.out_path.empty()) {
    const std::string ext = fs::path(o.out_path).extension().string();
    if (ext == ".csv") return ReportFormat::csv;
    if (ext == ".json") return ReportFormat::json;
  }
  return fallback;
}

std::string output_path(const Options& o, const std::string& stem,
                        ReportFormat format) {
  if (!o.out_path.empty()) return o.out_path;
  return stem + (format == ReportFormat::json ? ".json" : ".csv");
}

SelectionConfig selection_config(const Options& o) {
  SelectionConfig config;
  config.histogram.bins = o.bins;
  config.histogram.range_mode = parse_range_mode(o.range_mode);
  config.histogram.require_valid();
  config.heuristic = parse_heuristic(o.heuristic);
  config.seed = o.seed;
  if (config.heuristic == Heuristic::random && !config.seed) {
    throw ConfigError("--heuristic random requires --seed");
  }
  return config;
}

void check_common(const Options& o) {
  parse_score_rule(o.rule);
  if (!(o.temperature > 0.0)) throw ConfigError("--temperature must be > 0");
  if (o.max_len < 1) throw ConfigError("--max-len must be >= 1");
  if (!o.format.empty()) parse_report_format(o.format);
}

int cmd_select(const Options& o, std::ostream& out) {
  check_common(o);
  const SelectionConfig config = selection_config(o);
  const ReportFormat format = output_format(o, ReportFormat::json);
  const Inputs in = load_inputs(o, false);
  const CandidateSet candidates = enumerate_candidates(in.id.layers(), o.max_len);
  const SelectionResult result = select(in.id, candidates, config);
  const std::string path = output_path(o, "selection", format);
  write_report(result, path, format);
  out << "best=" << result.best.to_string() << ' ' << to_string(result.heuristic)
      << '=' << format_number(result.best_value)
      << " candidates=" << candidates.combos.size() << " out=" << path << '\n';
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  check_common(o);
  const ReportFormat format = output_format(o, ReportFormat::json);
  const Inputs in = load_inputs(o, true);
  const LayerCombination combo = o.combo.empty()
                                     ? LayerCombination{in.id.layers() - 1}
                                     : LayerCombination::parse(o.combo);
  try {
    combo.require_valid_for(in.id.layers());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("--combo: ") + e.what());
  }
  const EvalReport report = evaluate(in.id, in.ood, combo);
  const std::string path = output_path(o, "eval", format);
  write_report(report, path, format);
  out << "combo=" << combo.to_string()
      << " avg_fpr95=" << format_number(report.avg_fpr95)
      << " avg_auroc=" << format_number(report.avg_auroc) << " out=" << path
      << '\n';
  return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  check_common(o);
  const ReportFormat format = output_format(o, ReportFormat::csv);
  const Inputs in = load_inputs(o, true);
  const CandidateSet candidates = enumerate_candidates(in.id.layers(), o.max_len);
  const std::vector<ScoreTensor> ood = in.ood_list();
  const auto ranking = oracle_search(in.id, ood, candidates);
  const auto rows = combination_size_sweep(ranking, o.max_len);
  const std::string path = output_path(o, "sweep", format);
  write_report(to_table(std::span<const SizeSweepRow>(rows)), path, format);
  out << "sizes=" << rows.size()
      << " baseline_avg_fpr95=" << format_number(rows.front().mean_avg_fpr95)
      << " best_avg_fpr95=" << format_number(ranking.front().avg_fpr95)
      << " out=" << path << '\n';
  return kOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  check_common(o);
  const ReportFormat format = output_format(o, ReportFormat::csv);
  const Inputs in = load_inputs(o, true);
  const CandidateSet candidates = enumerate_candidates(in.id.layers(), o.max_len);
  if (o.top_k < 1 || o.top_k > candidates.combos.size()) {
    throw ConfigError("--top-k must be in [1, " +
                      std::to_string(candidates.combos.size()) + "]");
  }
  const std::vector<ScoreTensor> ood = in.ood_list();
  const auto ranking = oracle_search(in.id, ood, candidates);
  const std::string path = output_path(o, "oracle", format);
  write_report(to_table(std::span<const RankedCombination>(ranking)), path, format);
  const SquareMatrix jaccard =
      jaccard_topk(std::span<const RankedCombination>(ranking), o.top_k);
  std::string jaccard_path = o.jaccard_out;
  if (jaccard_path.empty()) {
    fs::path p(path);
    jaccard_path = (p.parent_path() / (p.stem().string() + "_jaccard")).string() +
                   p.extension().string();
  }
  write_report(to_table(jaccard, "jaccard_topk"), jaccard_path, format);
  out << "top=" << ranking.front().combo.to_string()
      << " avg_fpr95=" << format_number(ranking.front().avg_fpr95)
      << " jaccard=" << o.top_k << 'x' << o.top_k << " out=" << path << '\n';
  return kOk;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  check_common(o);
  const ReportFormat format = output_format(o, ReportFormat::csv);
  static const std::set<std::string> kinds{"svcca",   "layer-distance",
                                           "top1",    "jsd",
                                           "entropy-profile", "entropy-fpr"};
  if (!kinds.count(o.kind)) {
    throw ConfigError("--kind must be one of svcca, layer-distance, top1, jsd, "
                      "entropy-profile, entropy-fpr");
  }
  const std::string path = output_path(o, o.kind, format);
  Table table;
  if (o.kind == "entropy-fpr") {
    const SelectionConfig config = selection_config(o);
    const Inputs in = load_inputs(o, true);
    const CandidateSet candidates = enumerate_candidates(in.id.layers(), o.max_len);
    const std::vector<ScoreTensor> ood = in.ood_list();
    const auto rows = entropy_fpr_scatter(in.id, ood, candidates, config.histogram);
    std::vector<double> h;
    std::vector<double> f;
    for (const auto& r : rows) {
      h.push_back(r.entropy);
      f.push_back(r.avg_fpr95);
    }
    table = to_table(std::span<const ScatterRow>(rows));
    out << "spearman=" << format_number(rows.size() >= 2 ? spearman(h, f) : 0.0)
        << ' ';
  } else {
    if (o.input.empty()) throw ConfigError("--input is required for --kind " + o.kind);
    if (o.kind == "svcca" || o.kind == "layer-distance") {
      const auto acts = load_activations(o.input);
      if (o.kind == "svcca") {
        table = to_table(svcca_matrix(acts, o.var_keep));
      } else {
        table = Table{"layer_distance", {"delta", "layer", "svcca"}, {}};
        for (const auto& [delta, values] : layer_distance_profile(acts, o.var_keep)) {
          for (std::size_t l = 0; l < values.size(); ++l) {
            table.rows.push_back({static_cast<std::int64_t>(delta),
                                  static_cast<std::int64_t>(l), values[l]});
          }
        }
      }
    } else {
      const ProbTensor probs = load_probs(o.input, o.temperature);
      const auto& names = probs.meta().layer_names;
      if (o.kind == "top1") {
        table = to_table(top1_agreement(probs), names);
      } else if (o.kind == "jsd") {
        table = to_table(jsd_matrix(probs), names);
      } else {
        table = Table{"entropy_profile", {"layer", "layer_name", "mean_entropy"}, {}};
        const auto profile = entropy_profile(probs);
        for (std::size_t l = 0; l < profile.size(); ++l) {
          table.rows.push_back({static_cast<std::int64_t>(l), names[l], profile[l]});
        }
      }
    }
  }
  write_report(table, path, format);
  out << "kind=" << o.kind << " rows=" << table.rows.size() << " out=" << path << '\n';
  return kOk;
}

int cmd_fixtures(const Options& o, std::ostream& out) {
  if (!o.seed) throw ConfigError("fixtures requires --seed");
  if (!(o.temperature > 0.0)) throw ConfigError("--temperature must be > 0");
  if (o.dtype != "f32" && o.dtype != "f64") throw ConfigError("--dtype must be f32 or f64");
  FixtureConfig config;
  config.family = parse_fixture_family(o.family);
  config.seed = *o.seed;
  config.n_id = o.n_id;
  config.n_ood = o.n_ood;
  config.ood_sets = o.ood_sets;
  config.layers = o.layers;
  config.classes = o.classes;
  config.planted = LayerCombination::parse(o.planted);
  config.require_valid();

  const fs::path dir = o.out_path.empty() ? fs::path(".") : fs::path(o.out_path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const Dtype dtype = o.dtype == "f32" ? Dtype::f32 : Dtype::f64;
  const FixtureSet set = generate_fixture(config);
  const std::string stem(to_string(config.family));
  FixtureManifest manifest{config, stem + "_id.lftn", {}};
  auto emit = [&](const RawLogits& logits, const std::string& file) {
    write_tensor(dir / file, logits, dtype);
    const std::string scores_file = file.substr(0, file.size() - 5) + ".scores.lftn";
    write_tensor(dir / scores_file, mcm_score(logits, o.temperature), dtype);
  };
  emit(set.id, manifest.id_file);
  for (std::size_t s = 0; s < set.ood.size(); ++s) {
    manifest.ood_files.push_back(stem + "_ood" + std::to_string(s) + ".lftn");
    emit(set.ood[s], manifest.ood_files.back());
  }
  write_text_file(dir / (stem + ".json"), render_manifest(manifest));
  out << "family=" << stem << " planted=" << config.planted.to_string()
      << " files=" << 2 * (1 + set.ood.size()) + 1 << " dir=" << dir.string()
      << '\n';
  return kOk;
}

void add_common(CLI::App* cmd, Options& o, bool ood) {
  cmd->add_option("--id", o.id_path, "ID tensor (.lftn) or score CSV");
  if (ood) cmd->add_option("--ood", o.ood_paths, "OOD tensor; repeat per dataset");
  cmd->add_option("--rule", o.rule, "Scoring rule for logits/probs inputs");
  cmd->add_option("--temperature", o.temperature, "Softmax temperature");
  cmd->add_option("--max-len", o.max_len, "Largest combination size");
  cmd->add_option("--out", o.out_path, "Output file");
  cmd->add_option("--format", o.format, "json or csv");
}

void add_selection(CLI::App* cmd, Options& o) {
  cmd->add_option("--bins", o.bins, "Histogram bins");
  cmd->add_option("--heuristic", o.heuristic,
                  "entropy, kurtosis, std, gini, jsd, average or random");
  cmd->add_option("--range-mode", o.range_mode, "empirical_minmax or fixed_unit");
  cmd->add_option("--seed", o.seed, "Seed for the random heuristic");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"Layer-fusion OOD detection toolkit", "layerfuse"};
  app.require_subcommand(1);

  auto* select_cmd = app.add_subcommand("select", "Pick a layer combination by entropy");
  add_common(select_cmd, o, false);
  add_selection(select_cmd, o);

  auto* eval_cmd = app.add_subcommand("eval", "FPR@95 and AUROC for one combination");
  add_common(eval_cmd, o, true);
  eval_cmd->add_option("--combo", o.combo, "Layers to fuse, e.g. 2,5,11");

  auto* sweep_cmd = app.add_subcommand("sweep", "Average FPR@95 per combination size");
  add_common(sweep_cmd, o, true);

  auto* oracle_cmd = app.add_subcommand("oracle", "Rank combinations by true FPR@95");
  add_common(oracle_cmd, o, true);
  oracle_cmd->add_option("--top-k", o.top_k, "Size of the Jaccard matrix");
  oracle_cmd->add_option("--jaccard-out", o.jaccard_out, "Jaccard matrix output");

  auto* analyze_cmd = app.add_subcommand("analyze", "Representation diagnostics");
  add_common(analyze_cmd, o, true);
  add_selection(analyze_cmd, o);
  analyze_cmd->add_option("--kind", o.kind,
                          "svcca, layer-distance, top1, jsd, entropy-profile "
                          "or entropy-fpr")
      ->required();
  analyze_cmd->add_option("--input", o.input, "Tensor file or activation directory");
  analyze_cmd->add_option("--var-keep", o.var_keep, "SVCCA variance retained");

  auto* fixtures_cmd = app.add_subcommand("fixtures", "Generate synthetic tensors");
  fixtures_cmd->add_option("--family", o.family, "complementary, redundant or flat");
  fixtures_cmd->add_option("--seed", o.seed, "Generator seed");
  fixtures_cmd->add_option("--out", o.out_path, "Output directory");
  fixtures_cmd->add_option("--n-id", o.n_id, "ID samples");
  fixtures_cmd->add_option("--n-ood", o.n_ood, "OOD samples per set");
  fixtures_cmd->add_option("--ood-sets", o.ood_sets, "Number of OOD sets");
  fixtures_cmd->add_option("--layers", o.layers, "Layer count");
  fixtures_cmd->add_option("--classes", o.classes, "Class count");
  fixtures_cmd->add_option("--planted", o.planted, "Planted subset, e.g. 2,5,11");
  fixtures_cmd->add_option("--temperature", o.temperature, "Temperature of the MCM scores files");
  fixtures_cmd->add_option("--dtype", o.dtype, "f32 or f64");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (select_cmd->parsed()) return cmd_select(o, out);
    if (eval_cmd->parsed()) return cmd_eval(o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out);
    if (oracle_cmd->parsed()) return cmd_oracle(o, out);
    if (analyze_cmd->parsed()) return cmd_analyze(o, out);
    if (fixtures_cmd->parsed()) return cmd_fixtures(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kFormatError;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kFormatError;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidationError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace layerfuse::cli
