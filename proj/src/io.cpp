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

#include "layerfuse/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "layerfuse/errors.hpp"

namespace layerfuse {
namespace {

using nlohmann::json;

constexpr std::array<char, 4> kMagic{'L', 'F', 'T', 'N'};
constexpr std::uint32_t kVersion = 1;

// --- little-endian byte helpers -------------------------------------------

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  put_u32(out, bits);
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

double get_f32(const std::uint8_t* p) {
  return static_cast<double>(std::bit_cast<float>(get_u32(p)));
}

std::uint32_t checked_dim(std::size_t d, const char* what) {
  if (d > 0xffffffffULL) {
    throw FormatError(std::string(what) + " does not fit in a u32 dimension");
  }
  return static_cast<std::uint32_t>(d);
}

// --- JSON header ------------------------------------------------------------

json meta_json(const TensorMeta& meta, TensorKind kind) {
  json j;
  j["kind"] = std::string(to_string(kind));
  j["model_id"] = meta.model_id;
  j["dataset_id"] = meta.dataset_id;
  j["layer_names"] = meta.layer_names;
  j["temperature"] = meta.temperature;
  j["score_rule"] = std::string(to_string(meta.score_rule));
  j["created_utc"] = meta.created_utc;
  return j;
}

template <class T>
T require_field(const json& j, const char* key, std::string_view context) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw FormatError(std::string(context) + ": header is missing \"" + key + "\"");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string(context) + ": header field \"" + key +
                      "\" has the wrong type");
  }
}

TensorMeta parse_meta(const json& j, std::string_view context) {
  TensorMeta meta;
  meta.model_id = require_field<std::string>(j, "model_id", context);
  meta.dataset_id = require_field<std::string>(j, "dataset_id", context);
  meta.layer_names = require_field<std::vector<std::string>>(j, "layer_names", context);
  meta.temperature = require_field<double>(j, "temperature", context);
  meta.created_utc = require_field<std::string>(j, "created_utc", context);
  try {
    meta.score_rule =
        parse_score_rule(require_field<std::string>(j, "score_rule", context));
  } catch (const ConfigError& e) {
    throw FormatError(std::string(context) + ": " + e.what());
  }
  return meta;
}

// --- canonical JSON rendering ----------------------------------------------

void render_json(const json& j, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close_pad(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        render_json(it.value(), out, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        render_json(j[i], out, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_number(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string canonical(const json& j) {
  std::string out;
  render_json(j, out, 0);
  out += '\n';
  return out;
}

json combo_json(const LayerCombination& combo) { return json(combo.layers()); }

// --- CSV --------------------------------------------------------------------

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Table::Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return csv_escape(*s);
  if (const auto* d = std::get_if<double>(&cell)) {
    return std::isfinite(*d) ? format_number(*d) : "";
  }
  return std::to_string(std::get<std::int64_t>(cell));
}

json cell_json(const Table::Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  return std::get<std::int64_t>(cell);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view text, double& value) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

std::string_view to_string(TensorKind kind) {
  switch (kind) {
    case TensorKind::scores:
      return "scores";
    case TensorKind::probs:
      return "probs";
    case TensorKind::embeddings:
      return "embeddings";
    case TensorKind::logits:
      return "logits";
  }
  return "scores";
}

TensorKind kind_of(const AnyTensor& tensor) {
  return static_cast<TensorKind>(tensor.index() == 0   ? 1
                                 : tensor.index() == 1 ? 2
                                 : tensor.index() == 2 ? 3
                                                       : 4);
}

std::vector<std::uint8_t> encode_tensor(const AnyTensor& tensor, Dtype dtype) {
  const TensorKind kind = kind_of(tensor);
  std::array<std::uint32_t, 3> dims{};
  json header;
  std::vector<std::span<const double>> blocks;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        header = meta_json(t.meta(), kind);
        dims[0] = checked_dim(t.samples(), "samples");
        dims[1] = checked_dim(t.layers(), "layers");
        if constexpr (std::is_same_v<T, ScoreTensor>) {
          blocks.push_back(t.data());
        } else if constexpr (std::is_same_v<T, EmbeddingSet>) {
          dims[2] = checked_dim(t.dim(), "dim");
          header["text_dims"] = {t.classes(), t.text_dim()};
          blocks.push_back(t.image_data());
          blocks.push_back(t.text_data());
        } else {
          dims[2] = checked_dim(t.classes(), "classes");
          blocks.push_back(t.data());
        }
      },
      tensor);

  const std::string header_text = header.dump();
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u32(out, kVersion);
  out.push_back(static_cast<std::uint8_t>(kind));
  for (std::uint32_t d : dims) put_u32(out, d);
  out.push_back(static_cast<std::uint8_t>(dtype));
  put_u32(out, checked_dim(header_text.size(), "header"));
  out.insert(out.end(), header_text.begin(), header_text.end());
  for (auto block : blocks) {
    for (double v : block) {
      if (dtype == Dtype::f64) {
        put_f64(out, v);
      } else {
        put_f32(out, v);
      }
    }
  }
  return out;
}

LoadedTensor decode_tensor(std::span<const std::uint8_t> bytes,
                           std::string_view context) {
  const std::string where(context);
  if (bytes.size() < kTensorFixedHeaderSize) {
    throw FormatError(where + ": truncated header: " + std::to_string(bytes.size()) +
                      " bytes, need at least " +
                      std::to_string(kTensorFixedHeaderSize));
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError(where + ": bad magic, expected \"LFTN\"");
  }
  if (const std::uint32_t version = get_u32(&bytes[4]); version != kVersion) {
    throw FormatError(where + ": unsupported version " + std::to_string(version));
  }
  const std::uint8_t kind_byte = bytes[8];
  if (kind_byte < 1 || kind_byte > 4) {
    throw FormatError(where + ": unknown tensor kind " + std::to_string(kind_byte));
  }
  const auto kind = static_cast<TensorKind>(kind_byte);
  const std::array<std::uint64_t, 3> dims{get_u32(&bytes[9]), get_u32(&bytes[13]),
                                          get_u32(&bytes[17])};
  const std::uint8_t dtype_byte = bytes[21];
  if (dtype_byte != 1 && dtype_byte != 2) {
    throw FormatError(where + ": unknown dtype " + std::to_string(dtype_byte));
  }
  const auto dtype = static_cast<Dtype>(dtype_byte);
  const std::uint64_t header_len = get_u32(&bytes[22]);
  if (header_len > bytes.size() - kTensorFixedHeaderSize) {
    throw FormatError(where + ": header length " + std::to_string(header_len) +
                      " exceeds file size");
  }

  const bool three_d = kind != TensorKind::scores;
  if (dims[0] == 0 || dims[1] == 0 || (three_d ? dims[2] == 0 : dims[2] != 0)) {
    throw FormatError(where + ": invalid dims for " + std::string(to_string(kind)) +
                      " tensor");
  }

  const auto* header_begin =
      reinterpret_cast<const char*>(bytes.data() + kTensorFixedHeaderSize);
  json header;
  try {
    header = json::parse(header_begin, header_begin + header_len);
  } catch (const json::exception& e) {
    throw FormatError(where + ": header is not valid JSON: " + e.what());
  }
  if (!header.is_object()) throw FormatError(where + ": header is not an object");
  if (require_field<std::string>(header, "kind", where) != to_string(kind)) {
    throw FormatError(where + ": header kind does not match kind byte");
  }
  TensorMeta meta = parse_meta(header, where);

  std::uint64_t text_rows = 0;
  std::uint64_t text_dim = 0;
  if (kind == TensorKind::embeddings) {
    const auto text_dims = require_field<std::vector<std::uint64_t>>(header, "text_dims", where);
    if (text_dims.size() != 2 || text_dims[0] == 0 || text_dims[1] == 0 ||
        text_dims[0] > 0xffffffffULL || text_dims[1] > 0xffffffffULL) {
      throw FormatError(where + ": text_dims must be two positive u32 values");
    }
    text_rows = text_dims[0];
    text_dim = text_dims[1];
  } else if (header.contains("text_dims")) {
    throw FormatError(where + ": text_dims only belongs to embeddings");
  }

  // u32 dims: the products below fit in u64 only up to the fourth factor.
  const unsigned __int128 main_count = static_cast<unsigned __int128>(dims[0]) *
                                       dims[1] * (three_d ? dims[2] : 1);
  const unsigned __int128 count =
      main_count + static_cast<unsigned __int128>(text_rows) * text_dim;
  const std::size_t width = dtype == Dtype::f64 ? 8 : 4;
  const unsigned __int128 expected = count * width;
  const std::uint64_t actual = bytes.size() - kTensorFixedHeaderSize - header_len;
  if (expected != actual) {
    throw FormatError(
        where + ": payload has " + std::to_string(actual) + " bytes, expected " +
        (expected > 0xffffffffffffffffULL ? std::string("more than 2^64")
                                          : std::to_string(static_cast<std::uint64_t>(expected))));
  }

  const std::uint8_t* payload = bytes.data() + kTensorFixedHeaderSize + header_len;
  std::vector<double> values(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = dtype == Dtype::f64 ? get_f64(payload + 8 * i) : get_f32(payload + 4 * i);
  }

  const auto n = static_cast<std::size_t>(dims[0]);
  const auto l = static_cast<std::size_t>(dims[1]);
  const auto c = static_cast<std::size_t>(dims[2]);
  auto checked = [&](auto tensor) -> LoadedTensor {
    try {
      require_valid(tensor);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    return LoadedTensor{std::move(tensor), dtype};
  };
  switch (kind) {
    case TensorKind::scores:
      return checked(ScoreTensor(n, l, std::move(values), std::move(meta)));
    case TensorKind::probs:
      return checked(ProbTensor(n, l, c, std::move(values), std::move(meta)));
    case TensorKind::logits:
      return checked(RawLogits(n, l, c, std::move(values), std::move(meta)));
    case TensorKind::embeddings: {
      const auto split = static_cast<std::ptrdiff_t>(main_count);
      std::vector<double> text(values.begin() + split, values.end());
      values.resize(static_cast<std::size_t>(main_count));
      return checked(EmbeddingSet(n, l, c, std::move(values),
                                  static_cast<std::size_t>(text_rows),
                                  static_cast<std::size_t>(text_dim),
                                  std::move(text), std::move(meta)));
    }
  }
  throw FormatError(where + ": unreachable tensor kind");
}

void write_tensor(const std::filesystem::path& path, const AnyTensor& tensor,
                  Dtype dtype) {
  const std::vector<std::uint8_t> bytes = encode_tensor(tensor, dtype);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

LoadedTensor read_tensor(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_binary_file(path);
  return decode_tensor(bytes, path.string());
}

ScoreTensor read_csv_scores(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  const std::string where = path.string();
  if (lines.empty()) throw FormatError(where + ": empty file");
  const std::vector<std::string> header = split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "sample_id") {
    throw FormatError(where + ":1: header must be sample_id,layer_0,...");
  }
  const std::size_t layers = header.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    if (header[l + 1] != "layer_" + std::to_string(l)) {
      throw FormatError(where + ":1: expected column layer_" + std::to_string(l) +
                        ", found '" + header[l + 1] + "'");
    }
  }
  std::vector<double> data;
  std::size_t samples = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string line_no = where + ":" + std::to_string(i + 1);
    const std::vector<std::string> cells = split_csv_line(lines[i]);
    if (cells.size() != layers + 1) {
      throw FormatError(line_no + ": expected " + std::to_string(layers + 1) +
                        " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t l = 0; l < layers; ++l) {
      double v = 0.0;
      if (!parse_double(cells[l + 1], v)) {
        throw FormatError(line_no + ": cannot parse '" + cells[l + 1] +
                          "' in column layer_" + std::to_string(l));
      }
      data.push_back(v);
    }
    ++samples;
  }
  if (samples == 0) throw FormatError(where + ": no data rows");
  TensorMeta meta;
  meta.dataset_id = path.stem().string();
  meta.layer_names.assign(header.begin() + 1, header.end());
  ScoreTensor tensor(samples, layers, std::move(data), std::move(meta));
  try {
    require_valid(tensor);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return tensor;
}

NumericMatrix read_csv_matrix(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  const std::string where = path.string();
  NumericMatrix m;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::vector<std::string> cells = split_csv_line(lines[i]);
    if (m.rows == 0) m.cols = cells.size();
    if (cells.size() != m.cols) {
      throw FormatError(where + ":" + std::to_string(i + 1) + ": expected " +
                        std::to_string(m.cols) + " cells, found " +
                        std::to_string(cells.size()));
    }
    for (const auto& cell : cells) {
      double v = 0.0;
      if (!parse_double(cell, v)) {
        throw FormatError(where + ":" + std::to_string(i + 1) +
                          ": cannot parse '" + cell + "'");
      }
      m.data.push_back(v);
    }
    ++m.rows;
  }
  if (m.rows == 0) throw FormatError(where + ": no data rows");
  return m;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

Table to_table(const EvalReport& report) {
  Table t{"eval", {"dataset_id", "fpr95", "auroc", "n_id", "n_ood"}, {}};
  for (const auto& [name, m] : report.per_dataset) {
    t.rows.push_back({name, m.fpr95, m.auroc, as_int(m.n_id), as_int(m.n_ood)});
  }
  t.rows.push_back({std::string("average"), report.avg_fpr95, report.avg_auroc,
                    std::string(), std::string()});
  return t;
}

Table to_table(const SelectionResult& result) {
  Table t{"selection", {"combo", "size", "criterion"}, {}};
  for (const auto& [combo, value] : result.criterion_values) {
    t.rows.push_back({combo.to_string(), as_int(combo.size()), value});
  }
  return t;
}

Table to_table(const LayerPairMatrix& matrix,
               std::span<const std::string> layer_names) {
  const std::size_t n = matrix.matrix.size;
  auto name = [&](std::size_t i) {
    return i < layer_names.size() ? layer_names[i] : "layer_" + std::to_string(i);
  };
  Table t{std::string(to_string(matrix.kind)), {"layer"}, {}};
  for (std::size_t j = 0; j < n; ++j) t.columns.push_back(name(j));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Table::Cell> row{name(i)};
    for (std::size_t j = 0; j < n; ++j) row.emplace_back(matrix.matrix(i, j));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table to_table(const SquareMatrix& matrix, std::string kind) {
  Table t{std::move(kind), {"rank"}, {}};
  for (std::size_t j = 0; j < matrix.size; ++j) t.columns.push_back(std::to_string(j + 1));
  for (std::size_t i = 0; i < matrix.size; ++i) {
    std::vector<Table::Cell> row{as_int(i + 1)};
    for (std::size_t j = 0; j < matrix.size; ++j) row.emplace_back(matrix(i, j));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table to_table(std::span<const RankedCombination> ranking) {
  Table t{"oracle", {"rank", "combo", "size", "avg_fpr95"}, {}};
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    t.rows.push_back({as_int(i + 1), ranking[i].combo.to_string(),
                      as_int(ranking[i].combo.size()), ranking[i].avg_fpr95});
  }
  return t;
}

Table to_table(std::span<const ScatterRow> rows) {
  Table t{"entropy_fpr", {"combo", "size", "entropy", "avg_fpr95"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.combo.to_string(), as_int(r.combo.size()), r.entropy, r.avg_fpr95});
  }
  return t;
}

Table to_table(std::span<const SizeSweepRow> rows) {
  Table t{"sweep",
          {"combo_size", "combos", "mean_avg_fpr95", "min_avg_fpr95", "max_avg_fpr95"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({as_int(r.combo_size), as_int(r.combos), r.mean_avg_fpr95,
                      r.min_avg_fpr95, r.max_avg_fpr95});
  }
  return t;
}

std::string render(const Table& table, ReportFormat format) {
  if (format == ReportFormat::json) {
    json j;
    j["kind"] = table.kind;
    j["columns"] = table.columns;
    j["rows"] = json::array();
    for (const auto& row : table.rows) {
      json r = json::array();
      for (const auto& cell : row) r.push_back(cell_json(cell));
      j["rows"].push_back(std::move(r));
    }
    return canonical(j);
  }
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string render(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) return render(to_table(report), format);
  json j;
  j["kind"] = "eval";
  j["positive_class"] = "id";
  j["combo"] = combo_json(report.combo);
  j["score_rule"] = std::string(to_string(report.score_rule));
  j["threshold_at_tpr95"] = report.threshold_at_tpr95;
  j["average"] = {{"fpr95", report.avg_fpr95}, {"auroc", report.avg_auroc}};
  j["per_dataset"] = json::object();
  for (const auto& [name, m] : report.per_dataset) {
    j["per_dataset"][name] = {{"fpr95", m.fpr95},
                              {"auroc", m.auroc},
                              {"n_id", m.n_id},
                              {"n_ood", m.n_ood}};
  }
  return canonical(j);
}

std::string render(const SelectionResult& result, ReportFormat format) {
  if (format == ReportFormat::csv) return render(to_table(result), format);
  json j;
  j["kind"] = "selection";
  j["best"] = combo_json(result.best);
  j["best_value"] = result.best_value;
  j["heuristic"] = std::string(to_string(result.heuristic));
  j["orientation"] = std::string(to_string(result.orientation));
  j["histogram"] = {{"bins", result.histogram.bins},
                    {"range_mode", std::string(to_string(result.histogram.range_mode))},
                    {"entropy_log", "natural"},
                    {"jsd_log", "base2"}};
  j["criterion_values"] = json::object();
  for (const auto& [combo, value] : result.criterion_values) {
    j["criterion_values"][combo.to_string()] = value;
  }
  return canonical(j);
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_report(const EvalReport& report, const std::filesystem::path& path,
                  ReportFormat format) {
  write_text_file(path, render(report, format));
}

void write_report(const SelectionResult& result,
                  const std::filesystem::path& path, ReportFormat format) {
  write_text_file(path, render(result, format));
}

void write_report(const Table& table, const std::filesystem::path& path,
                  ReportFormat format) {
  write_text_file(path, render(table, format));
}

std::string render_manifest(const FixtureManifest& manifest) {
  const FixtureConfig& c = manifest.config;
  json j;
  j["family"] = std::string(to_string(c.family));
  j["seed"] = c.seed;
  j["n_id"] = c.n_id;
  j["n_ood"] = c.n_ood;
  j["ood_sets"] = c.ood_sets;
  j["layers"] = c.layers;
  j["classes"] = c.classes;
  j["planted"] = combo_json(c.planted);
  j["high_margin"] = c.high_margin;
  j["low_margin"] = c.low_margin;
  j["hard_fraction"] = c.hard_fraction;
  j["id_noise"] = c.id_noise;
  j["ood_spread"] = c.ood_spread;
  j["id_file"] = manifest.id_file;
  j["ood_files"] = manifest.ood_files;
  // Full precision so read_manifest reproduces the config exactly.
  return j.dump(2) + "\n";
}

FixtureManifest read_manifest(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_binary_file(path);
  const std::string where = path.string();
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
  FixtureManifest m;
  FixtureConfig& c = m.config;
  try {
    c.family = parse_fixture_family(require_field<std::string>(j, "family", where));
  } catch (const ConfigError& e) {
    throw FormatError(where + ": " + e.what());
  }
  c.seed = require_field<std::uint64_t>(j, "seed", where);
  c.n_id = require_field<std::size_t>(j, "n_id", where);
  c.n_ood = require_field<std::size_t>(j, "n_ood", where);
  c.ood_sets = require_field<std::size_t>(j, "ood_sets", where);
  c.layers = require_field<std::size_t>(j, "layers", where);
  c.classes = require_field<std::size_t>(j, "classes", where);
  c.planted = LayerCombination(require_field<std::vector<std::size_t>>(j, "planted", where));
  c.high_margin = require_field<double>(j, "high_margin", where);
  c.low_margin = require_field<double>(j, "low_margin", where);
  c.hard_fraction = require_field<double>(j, "hard_fraction", where);
  c.id_noise = require_field<double>(j, "id_noise", where);
  c.ood_spread = require_field<double>(j, "ood_spread", where);
  m.id_file = require_field<std::string>(j, "id_file", where);
  m.ood_files = require_field<std::vector<std::string>>(j, "ood_files", where);
  return m;
}

}  // namespace layerfuse
