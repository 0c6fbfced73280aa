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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hanmlm/rng.hpp"
#include "hanmlm/tokenizer.hpp"

namespace hanmlm {

using Matrix = Eigen::MatrixXd;

struct ModelConfig {
  std::size_t vocab_size = 2000;
  std::size_t hidden_size = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t intermediate_size = 128;
  std::size_t max_position = 128;
  std::size_t type_vocab_size = 2;
  double dropout_prob = 0.1;
  double layer_norm_eps = 1e-12;
  double initializer_range = 0.02;

  // BERT-base sized encoder with a 16,424 entry vocabulary.
  static ModelConfig base_scale();

  // Throws InvalidArgument naming the offending field.
  void validate() const;
  std::size_t head_size() const { return hidden_size / num_heads; }

  std::string to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static ModelConfig from_json(std::string_view text, ModelConfig defaults);
  static ModelConfig from_json(std::string_view text);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LayerNormParams {
  Matrix gain;  // 1 x H
  Matrix bias;  // 1 x H
};

struct EncoderLayerParams {
  Matrix query_weight, query_bias;
  Matrix key_weight, key_bias;
  Matrix value_weight, value_bias;
  Matrix attention_output_weight, attention_output_bias;
  LayerNormParams attention_norm;
  Matrix intermediate_weight, intermediate_bias;
  Matrix output_weight, output_bias;
  LayerNormParams output_norm;
};

// Every trainable tensor of the encoder plus the MLM head bias. The
// head's projection is tied to token_embedding.
struct ModelParams {
  ModelConfig config;
  Matrix token_embedding;     // M x H
  Matrix position_embedding;  // P x H
  Matrix segment_embedding;   // T x H
  LayerNormParams embedding_norm;
  std::vector<EncoderLayerParams> layers;
  Matrix head_bias;  // 1 x M

  // Correctly shaped, all zero (layer-norm gains included).
  static ModelParams zeros(const ModelConfig& config);

  // Stable order; names look like "layer.0.attention.query.weight".
  std::vector<std::pair<std::string, Matrix*>> named_tensors();
  std::vector<std::pair<std::string, const Matrix*>> named_tensors() const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  // Hash of the raw parameter bytes.
  std::uint64_t fingerprint() const;

  void set_zero();
  // this += scale * other
  void add_scaled(const ModelParams& other, double scale);
  double squared_norm() const;
};

bool bitwise_equal(const ModelParams& a, const ModelParams& b);

// Weights ~ N(0, initializer_range^2), biases 0, layer-norm gain 1.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

enum class Mode { kTrain, kEval };

// One (possibly padded) sequence. `padding` may be empty for none.
struct ModelInput {
  std::span<const TokenId> ids;
  std::span<const std::uint8_t> segments;
  std::span<const std::uint8_t> padding;
};

// Throws InvalidArgument for ids, positions or segments out of range.
void validate_input(const ModelConfig& config, const ModelInput& input);

// Per-layer intermediates needed by backward().
struct LayerCache {
  Matrix input;
  Matrix query, key, value;
  std::vector<Matrix> probs;        // per head, before dropout
  std::vector<Matrix> probs_mask;   // per head dropout scale; empty in eval
  Matrix context;
  Matrix attention_mask;            // dropout scale on the attention output
  Matrix attention_normed, attention_inv_std;
  Matrix attention_out;             // layer-norm output
  Matrix intermediate_pre, intermediate_act;
  Matrix output_mask;
  Matrix output_normed, output_inv_std;
};

struct ForwardCache {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> segments;
  Matrix embedding_normed, embedding_inv_std;
  Matrix embedding_mask;
  std::vector<LayerCache> layers;
  Matrix final_hidden;
};

struct ForwardOutput {
  // layer_hidden[0] is the embedding output, layer_hidden[k] the output
  // of encoder layer k.
  std::vector<Matrix> layer_hidden;
  Matrix logits;  // seq_len x M

  const Matrix& hidden() const { return layer_hidden.back(); }
  const Matrix& representation(std::size_t layer) const { return layer_hidden.at(layer); }
};

// Embedding sum, encoder stack, tied MLM head. `rng` drives dropout and
// is required in train mode when dropout_prob > 0. `cache` is filled when
// non-null.
ForwardOutput forward(const ModelParams& params, const ModelInput& input, Mode mode,
                      Rng* rng = nullptr, ForwardCache* cache = nullptr);

// Gradients of a scalar loss with respect to the forward outputs. Either
// member may be empty (zero).
struct OutputGradients {
  Matrix logits;          // seq_len x M
  Matrix representation;  // seq_len x H at `representation_layer`
  std::size_t representation_layer = 0;
};

// Accumulates dLoss/dTheta into `grads` (not cleared first).
void backward(const ModelParams& params, const ForwardCache& cache,
              const OutputGradients& upstream, ModelParams& grads);

// Row-wise log-softmax.
Matrix log_softmax(const Matrix& logits);

}  // namespace hanmlm
