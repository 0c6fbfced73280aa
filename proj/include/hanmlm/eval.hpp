// Copyright 2026 The hanmlm Authors
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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hanmlm/model.hpp"
#include "hanmlm/tokenizer.hpp"
#include "hanmlm/training.hpp"

namespace hanmlm {

enum class Normalization {
  kPerToken,     // sum of NLL over masked tokens / masked-token count
  kPerSentence,  // sum of per-sentence NLL / sentence count
};

struct EvalConfig {
  std::size_t repeats = 3;
  double mask_probability = 0.15;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  Normalization normalization = Normalization::kPerToken;

  void validate() const;
  std::string to_json() const;
  static EvalConfig from_json(std::string_view text, EvalConfig defaults);
  static EvalConfig from_json(std::string_view text);
};

// Encoded evaluation sentences with one fixed masking per seed. Every
// model scored against the same MaskedDataset sees identical inputs.
struct MaskedDataset {
  std::string name;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<MaskedSequence>> repeats;  // [repeat][sentence]
};

MaskedDataset prepare_dataset(std::string name, std::span<const EncodedSequence> sentences,
                              const EvalConfig& config);

struct RepeatScore {
  std::uint64_t seed = 0;
  double log_perplexity = 0.0;
  double accuracy = 0.0;  // percent
  std::size_t masked_tokens = 0;
  std::size_t sentences = 0;

  friend bool operator==(const RepeatScore&, const RepeatScore&) = default;
};

// Scores one repeat: NLL (natural log) and argmax accuracy over masked
// positions. Throws InvalidArgument("empty corpus") with no sentences.
RepeatScore score_repeat(const ModelParams& params, std::span<const MaskedSequence> sentences,
                         Normalization normalization);

// Per-repeat log-perplexity and accuracy.
std::vector<double> log_perplexity(const ModelParams& params, const MaskedDataset& data,
                                   Normalization normalization = Normalization::kPerToken);
std::vector<double> mlm_accuracy(const ModelParams& params, const MaskedDataset& data);

// Mean over sentences of the penalty between the two models on unmasked
// inputs, both in eval mode.
double representation_stray(const ModelParams& current, const ModelParams& base,
                            std::span<const EncodedSequence> sentences,
                            std::size_t layer = kFinalLayer);

struct DatasetScore {
  std::string dataset;
  double log_perplexity = 0.0;
  double accuracy = 0.0;
  std::vector<RepeatScore> repeats;

  friend bool operator==(const DatasetScore&, const DatasetScore&) = default;
};

struct ModelScore {
  std::string model;
  std::size_t vocab_size = 0;
  std::vector<DatasetScore> datasets;
  double average_log_perplexity = 0.0;
  double average_accuracy = 0.0;

  friend bool operator==(const ModelScore&, const ModelScore&) = default;
};

struct EvalReport {
  EvalConfig config;
  std::vector<ModelScore> models;

  std::string to_json() const;
  static EvalReport from_json(std::string_view text);
  // Fixed-width table, values rounded to 3 decimals.
  std::string to_table() const;
  // Columns: model,dataset,perplexity,accuracy,repeat ("mean" rows after
  // each dataset's repeats).
  std::string to_csv() const;

  friend bool operator==(const EvalReport& a, const EvalReport& b) {
    return a.models == b.models && a.config.to_json() == b.config.to_json();
  }
};

struct NamedModel {
  std::string name;
  const ModelParams* params;
};

ModelScore evaluate_model(const std::string& name, const ModelParams& params,
                          std::span<const MaskedDataset> datasets);

// Cells (model, dataset) run in parallel; results are ordered as given.
EvalReport evaluate(std::span<const NamedModel> models, std::span<const MaskedDataset> datasets,
                    const EvalConfig& config);

enum class ReportFormat { kTable, kJson, kCsv };
ReportFormat parse_report_format(std::string_view text);

// Points for figure-style curves: (step, series, value).
struct CurvePoint {
  std::size_t step;
  std::string series;
  double value;
};

std::string curves_to_csv(std::span<const CurvePoint> points);
// Line chart with one polyline per series.
std::string curves_to_svg(std::span<const CurvePoint> points, std::string_view title);

struct SweepRow {
  double lambda = 0.0;
  std::optional<ModelScore> score;  // empty when the run failed
  std::string error;
  double final_cross_lingual_l2 = 0.0;
  double final_stray = 0.0;
};

struct SweepReport {
  EvalConfig eval_config;
  std::string train_config_json;
  std::vector<std::string> datasets;
  std::vector<SweepRow> rows;
  std::vector<CurvePoint> curves;

  // Indices of the rows with the best average perplexity / accuracy.
  std::optional<std::size_t> best_perplexity_row() const;
  std::optional<std::size_t> best_accuracy_row() const;

  std::string to_json() const;
  static SweepReport from_json(std::string_view text);
  std::string to_table() const;
  std::string to_csv() const;
};

struct SweepOptions {
  bool record_curves = true;  // per-epoch dataset scores on the first seed
  std::function<void(const std::string&)> progress;
};

// Parses "a:b:step" (inclusive, rounded to 1e-9) or a comma list.
std::vector<double> parse_lambda_grid(std::string_view text);

// One training run per lambda from the same base parameters and seed,
// each scored on every dataset. Failed runs are recorded and skipped.
SweepReport sweep_lambda(std::span<const double> lambdas, const ModelParams& base,
                         std::span<const EncodedSequence> train_data,
                         std::span<const MaskedDataset> datasets, const TrainConfig& train_config,
                         const EvalConfig& eval_config, const SweepOptions& options = {});

}  // namespace hanmlm
