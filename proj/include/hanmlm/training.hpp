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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hanmlm/model.hpp"
#include "hanmlm/rng.hpp"
#include "hanmlm/tokenizer.hpp"

namespace hanmlm {

class Corpus;

enum class MaskingScheme {
  kMaskOnly,    // every selected position becomes [MASK]
  kBert801010,  // 80% [MASK], 10% random token, 10% unchanged
};

enum class LrSchedule { kWarmupLinearDecay, kWarmupConstant };

inline constexpr std::size_t kFinalLayer = std::numeric_limits<std::size_t>::max();

struct TrainConfig {
  double lambda = 0.0;
  double mask_probability = 0.15;
  double learning_rate = 5e-5;
  double warmup_fraction = 0.1;
  LrSchedule schedule = LrSchedule::kWarmupLinearDecay;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-6;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  MaskingScheme masking = MaskingScheme::kMaskOnly;
  // Layer whose hidden states the penalty compares; kFinalLayer means the
  // last encoder layer, 0 the embedding output.
  std::size_t representation_layer = kFinalLayer;
  std::size_t log_interval = 10;      // steps; partial intervals flush at epoch end
  std::size_t checkpoint_every = 0;   // epochs; 0 = final checkpoint only
  bool log_timestamps = false;

  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(std::string_view text, TrainConfig defaults);
  static TrainConfig from_json(std::string_view text);
};

// One masked sequence. `content` marks positions that are neither
// special tokens nor padding; only those can be masked or penalized.
struct MaskedSequence {
  std::vector<TokenId> input_ids;
  std::vector<std::uint8_t> segments;
  std::vector<std::uint8_t> padding;
  std::vector<std::uint8_t> content;
  std::vector<std::size_t> mask_positions;
  std::vector<TokenId> targets;  // original ids, parallel to mask_positions
  std::uint64_t seed = 0;

  std::size_t size() const { return input_ids.size(); }
  ModelInput view() const { return {input_ids, segments, padding}; }
};

// Marks content positions of an encoded sequence; with no masking.
MaskedSequence unmasked(const EncodedSequence& seq);

// Selects each content position with probability `probability`, forcing
// one if none was drawn, and rewrites selected inputs per `scheme`.
MaskedSequence mask_sentence(const EncodedSequence& seq, double probability, MaskingScheme scheme,
                             std::size_t vocab_size, Rng& rng);

// Sum over masked positions of -log softmax(logits)[target]. Throws
// InvalidArgument("no masked positions") when there are none.
double mlm_loss(const ForwardOutput& output, const MaskedSequence& seq);
// d mlm_loss / d logits.
Matrix mlm_loss_gradient(const ForwardOutput& output, const MaskedSequence& seq);

// Sum over content positions of ||base_j - current_j||^2.
double cross_lingual_penalty(const Matrix& current_hidden, const Matrix& base_hidden,
                             const MaskedSequence& seq);
double cross_lingual_penalty(const ForwardOutput& current, const ForwardOutput& base,
                             const MaskedSequence& seq);
// d penalty / d current_hidden.
Matrix cross_lingual_penalty_gradient(const Matrix& current_hidden, const Matrix& base_hidden,
                                      const MaskedSequence& seq);

// Mean Euclidean distance per content position.
double mean_representation_distance(const Matrix& current_hidden, const Matrix& base_hidden,
                                     const MaskedSequence& seq);

constexpr double total_loss(double mlm, double penalty, double lambda) { return mlm + lambda * penalty; }

// Frozen copy of the starting parameters. Always evaluated without
// dropout.
class BaseSnapshot {
 public:
  explicit BaseSnapshot(ModelParams params)
      : params_(std::move(params)), fingerprint_(params_.fingerprint()) {}

  const ModelParams& params() const { return params_; }
  std::uint64_t fingerprint() const { return fingerprint_; }
  ForwardOutput forward(const ModelInput& input) const { return hanmlm::forward(params_, input, Mode::kEval); }

 private:
  const ModelParams params_;
  const std::uint64_t fingerprint_;
};

struct LossBreakdown {
  double mlm = 0.0;
  double penalty = 0.0;
  double total = 0.0;
  double distance = 0.0;  // mean per-token representation distance
};

std::size_t resolve_layer(const ModelConfig& config, std::size_t layer);

// Loss of one sequence; adds `grad_scale` * dLoss/dTheta into `grads`
// when non-null. `base_output` may be null only when lambda is 0 and no
// distance is wanted.
LossBreakdown sequence_loss(const ModelParams& params, const ForwardOutput* base_output,
                            const MaskedSequence& seq, double lambda, std::size_t layer, Mode mode,
                            Rng* dropout_rng, ModelParams* grads, double grad_scale = 1.0);

struct TrainRecord {
  std::size_t step = 0;  // optimizer steps completed
  std::size_t epoch = 0; // 1-based epoch the interval belongs to
  double mlm_loss = 0.0;
  double penalty = 0.0;
  double total_loss = 0.0;
  double cross_lingual_l2 = 0.0;
  double lr = 0.0;
  std::optional<double> timestamp;

  std::string to_json() const;
};

struct TrainCallbacks {
  std::function<void(const TrainRecord&)> on_record;
  // Called after each completed epoch (1-based) with the current params.
  std::function<void(std::size_t, const ModelParams&)> on_epoch_end;
};

struct TrainOutputs {
  std::filesystem::path dir;  // empty: nothing written
};

struct TrainResult {
  ModelParams params;
  std::vector<TrainRecord> log;
  std::uint64_t base_fingerprint_before = 0;
  std::uint64_t base_fingerprint_after = 0;
};

// Continued MLM pretraining from `initial`, regularized towards the same
// parameters with weight config.lambda. Empty sequences are skipped.
// Writes train_log.jsonl, epoch-N.ckpt and model.ckpt under outputs.dir.
// On a non-finite loss, writes last-good.ckpt and throws NumericError.
TrainResult train(std::span<const EncodedSequence> data, const ModelParams& initial,
                  const TrainConfig& config, const TrainCallbacks& callbacks = {},
                  const TrainOutputs& outputs = {});

// Encodes each sentence as a single-segment sequence bounded by the
// model's max_position.
std::vector<EncodedSequence> encode_sentences(std::span<const std::string> sentences,
                                              const Vocabulary& vocab, std::size_t max_len);

std::string to_string(MaskingScheme scheme);
MaskingScheme parse_masking_scheme(std::string_view text);

}  // namespace hanmlm
