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

// Straight-line long double encoder used as a test oracle. Reads parameter
// values element by element and recomputes everything with plain loops.

#include <cmath>
#include <cstddef>
#include <vector>

#include "hanmlm/model.hpp"
#include "hanmlm/training.hpp"

namespace reference {

using Real = long double;
using Mat = std::vector<std::vector<Real>>;

inline Mat from(const hanmlm::Matrix& m) {
  Mat out(static_cast<std::size_t>(m.rows()), std::vector<Real>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat out(a.size(), std::vector<Real>(b[0].size(), 0.0L));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Mat affine(const Mat& x, const hanmlm::Matrix& w, const hanmlm::Matrix& b) {
  Mat out = matmul(x, from(w));
  for (auto& row : out)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b(0, static_cast<Eigen::Index>(j));
  return out;
}

inline Mat layer_norm(const Mat& x, const hanmlm::LayerNormParams& p, Real eps) {
  Mat out = x;
  for (auto& row : out) {
    Real mean = 0;
    for (Real v : row) mean += v;
    mean /= row.size();
    Real var = 0;
    for (Real v : row) var += (v - mean) * (v - mean);
    var /= row.size();
    const Real inv = 1.0L / std::sqrt(var + eps);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = (row[j] - mean) * inv * p.gain(0, static_cast<Eigen::Index>(j)) +
               p.bias(0, static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

inline Mat add(Mat a, const Mat& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
  return a;
}

// Hidden states after the embeddings (index 0) and after each layer.
inline std::vector<Mat> hidden_states(const hanmlm::ModelParams& p, const hanmlm::MaskedSequence& seq) {
  const auto& cfg = p.config;
  const std::size_t S = seq.size(), H = cfg.hidden_size, D = cfg.head_size();
  Mat x(S, std::vector<Real>(H));
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t j = 0; j < H; ++j) {
      const auto e = static_cast<Eigen::Index>(j);
      x[i][j] = static_cast<Real>(p.token_embedding(seq.input_ids[i], e)) + p.position_embedding(i, e) +
                p.segment_embedding(seq.segments[i], e);
    }
  x = layer_norm(x, p.embedding_norm, cfg.layer_norm_eps);
  std::vector<Mat> states{x};
  for (const auto& l : p.layers) {
    const Mat q = affine(x, l.query_weight, l.query_bias);
    const Mat k = affine(x, l.key_weight, l.key_bias);
    const Mat v = affine(x, l.value_weight, l.value_bias);
    Mat context(S, std::vector<Real>(H, 0.0L));
    for (std::size_t h = 0; h < cfg.num_heads; ++h) {
      for (std::size_t i = 0; i < S; ++i) {
        std::vector<Real> score(S, 0.0L);
        Real mx = -INFINITY;
        for (std::size_t j = 0; j < S; ++j) {
          if (!seq.padding.empty() && seq.padding[j]) continue;
          for (std::size_t d = 0; d < D; ++d) score[j] += q[i][h * D + d] * k[j][h * D + d];
          score[j] /= std::sqrt(static_cast<Real>(D));
          mx = std::max(mx, score[j]);
        }
        Real z = 0;
        for (std::size_t j = 0; j < S; ++j) {
          score[j] = (!seq.padding.empty() && seq.padding[j]) ? 0.0L : std::exp(score[j] - mx);
          z += score[j];
        }
        for (std::size_t j = 0; j < S; ++j)
          for (std::size_t d = 0; d < D; ++d) context[i][h * D + d] += score[j] / z * v[j][h * D + d];
      }
    }
    const Mat attn = layer_norm(add(x, affine(context, l.attention_output_weight, l.attention_output_bias)),
                                l.attention_norm, cfg.layer_norm_eps);
    Mat inter = affine(attn, l.intermediate_weight, l.intermediate_bias);
    for (auto& row : inter)
      for (Real& u : row) u = 0.5L * u * (1.0L + std::erf(u / std::sqrt(2.0L)));
    x = layer_norm(add(attn, affine(inter, l.output_weight, l.output_bias)), l.output_norm, cfg.layer_norm_eps);
    states.push_back(x);
  }
  return states;
}

inline Mat logits(const hanmlm::ModelParams& p, const Mat& hidden) {
  Mat out(hidden.size(), std::vector<Real>(p.config.vocab_size, 0.0L));
  for (std::size_t i = 0; i < hidden.size(); ++i)
    for (std::size_t t = 0; t < p.config.vocab_size; ++t) {
      Real s = p.head_bias(0, static_cast<Eigen::Index>(t));
      for (std::size_t j = 0; j < hidden[i].size(); ++j)
        s += hidden[i][j] * p.token_embedding(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
      out[i][t] = s;
    }
  return out;
}

inline Real mlm_loss(const hanmlm::ModelParams& p, const hanmlm::MaskedSequence& seq) {
  const Mat lg = logits(p, hidden_states(p, seq).back());
  Real loss = 0;
  for (std::size_t k = 0; k < seq.mask_positions.size(); ++k) {
    const auto& row = lg[seq.mask_positions[k]];
    Real mx = -INFINITY;
    for (Real v : row) mx = std::max(mx, v);
    Real z = 0;
    for (Real v : row) z += std::exp(v - mx);
    loss += mx + std::log(z) - row[static_cast<std::size_t>(seq.targets[k])];
  }
  return loss;
}

inline Real penalty(const hanmlm::ModelParams& current, const hanmlm::ModelParams& base,
                    const hanmlm::MaskedSequence& seq, std::size_t layer) {
  const Mat a = hidden_states(current, seq).at(layer);
  const Mat b = hidden_states(base, seq).at(layer);
  Real sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!seq.content[i]) continue;
    for (std::size_t j = 0; j < a[i].size(); ++j) sum += (a[i][j] - b[i][j]) * (a[i][j] - b[i][j]);
  }
  return sum;
}

inline Real total_loss(const hanmlm::ModelParams& current, const hanmlm::ModelParams& base,
                       const hanmlm::MaskedSequence& seq, Real lambda, std::size_t layer) {
  Real loss = mlm_loss(current, seq);
  if (lambda != 0) loss += lambda * penalty(current, base, seq, layer);
  return loss;
}

}  // namespace reference
