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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "layerfuse/analysis.hpp"
#include "layerfuse/fixtures.hpp"
#include "layerfuse/metrics.hpp"
#include "layerfuse/selection.hpp"
#include "layerfuse/tensor.hpp"

namespace layerfuse {

// Tensor file layout, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "LFTN"
//   4       4     u32 version (1)
//   8       1     u8 kind: 1 scores N,L,0 | 2 probs N,L,C | 3 embeddings N,L,D
//                 | 4 logits N,L,K
//   9       12    u32 dims[3]; unused trailing dims are 0
//   21      1     u8 dtype: 1 f32 | 2 f64
//   22      4     u32 header_json_len
//   26      ...   UTF-8 JSON header (TensorMeta, "kind", and for embeddings
//                 "text_dims": [K, D])
//   ...     ...   row-major payload; embeddings store the image block then
//                 the text block
//
// The JSON header is written compact with sorted keys.

inline constexpr std::size_t kTensorFixedHeaderSize = 26;

enum class Dtype : std::uint8_t { f32 = 1, f64 = 2 };
enum class TensorKind : std::uint8_t {
  scores = 1,
  probs = 2,
  embeddings = 3,
  logits = 4
};

std::string_view to_string(TensorKind kind);

using AnyTensor = std::variant<ScoreTensor, ProbTensor, EmbeddingSet, RawLogits>;

TensorKind kind_of(const AnyTensor& tensor);

struct LoadedTensor {
  AnyTensor tensor;
  Dtype dtype = Dtype::f64;
};

std::vector<std::uint8_t> encode_tensor(const AnyTensor& tensor,
                                        Dtype dtype = Dtype::f64);

/// Parses and validates a tensor image. f32 payloads are widened to f64.
/// Throws FormatError for layout problems (naming expected and actual byte
/// counts for truncation) and ValidationError for invariant violations.
LoadedTensor decode_tensor(std::span<const std::uint8_t> bytes,
                           std::string_view context = "tensor");

void write_tensor(const std::filesystem::path& path, const AnyTensor& tensor,
                  Dtype dtype = Dtype::f64);
LoadedTensor read_tensor(const std::filesystem::path& path);

/// CSV with header "sample_id,layer_0,...,layer_{L-1}" and one row per
/// sample. Every cell must be present and parse completely as a number.
/// Throws FormatError (with line number) or ValidationError.
ScoreTensor read_csv_scores(const std::filesystem::path& path);

/// Headerless numeric CSV, rows are samples.
struct NumericMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
};
NumericMatrix read_csv_matrix(const std::filesystem::path& path);

// Reports

enum class ReportFormat { json, csv };
ReportFormat parse_report_format(std::string_view name);

/// Loosely typed table for analysis outputs; also the CSV form of every
/// report.
struct Table {
  using Cell = std::variant<std::string, double, std::int64_t>;
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Floats in reports: printf "%.9g". Non-finite values become null / empty.
std::string format_number(double value);

Table to_table(const EvalReport& report);
Table to_table(const SelectionResult& result);
Table to_table(const LayerPairMatrix& matrix,
               std::span<const std::string> layer_names = {});
Table to_table(const SquareMatrix& matrix, std::string kind);
Table to_table(std::span<const RankedCombination> ranking);
Table to_table(std::span<const ScatterRow> rows);
Table to_table(std::span<const SizeSweepRow> rows);

/// Canonical renderings: JSON objects have sorted keys, two-space indent,
/// and numbers formatted by format_number.
std::string render(const EvalReport& report, ReportFormat format);
std::string render(const SelectionResult& result, ReportFormat format);
std::string render(const Table& table, ReportFormat format);

void write_report(const EvalReport& report, const std::filesystem::path& path,
                  ReportFormat format);
void write_report(const SelectionResult& result,
                  const std::filesystem::path& path, ReportFormat format);
void write_report(const Table& table, const std::filesystem::path& path,
                  ReportFormat format);

/// Sidecar describing a generated fixture, including the planted subset.
struct FixtureManifest {
  FixtureConfig config;
  std::string id_file;
  std::vector<std::string> ood_files;
};

std::string render_manifest(const FixtureManifest& manifest);
FixtureManifest read_manifest(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

}  // namespace layerfuse
