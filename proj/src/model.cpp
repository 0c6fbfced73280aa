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

#include "hanmlm/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include <nlohmann/json.hpp>

#include "hanmlm/error.hpp"

namespace hanmlm {
namespace {

using json = nlohmann::ordered_json;
using RowVector = Eigen::RowVectorXd;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  Matrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) mask(r, c) = rng.bernoulli(p) ? 0.0 : keep_scale;
  }
  return mask;
}

void apply_mask(Matrix& x, const Matrix& mask) {
  if (mask.size() != 0) x.array() *= mask.array();
}

// Row-wise layer norm; returns the output and stores xhat and 1/std.
Matrix layer_norm(const Matrix& x, const LayerNormParams& p, double eps, Matrix& normed,
                  Matrix& inv_std) {
  const Eigen::Index n = x.cols();
  normed.resize(x.rows(), n);
  inv_std.resize(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const RowVector centered = x.row(r).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std(r, 0) = is;
    normed.row(r) = centered * is;
  }
  Matrix y = normed.array().rowwise() * p.gain.row(0).array();
  y.array().rowwise() += p.bias.row(0).array();
  return y;
}

// Returns dx; accumulates dgain and dbias.
Matrix layer_norm_backward(const Matrix& dy, const Matrix& normed, const Matrix& inv_std,
                           const LayerNormParams& p, LayerNormParams& g) {
  g.gain.row(0) += (dy.array() * normed.array()).colwise().sum().matrix();
  g.bias.row(0) += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * p.gain.row(0).array();
  const double n = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / n;
    const double mean_dx = dxhat.row(r).dot(normed.row(r)) / n;
    dx.row(r) = inv_std(r, 0) * (dxhat.row(r).array() - mean_d - normed.row(r).array() * mean_dx);
  }
  return dx;
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

void affine_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix& dw, Matrix& db,
                     Matrix& dx) {
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
  dx.noalias() += dy * w.transpose();
}

void softmax_rows_inplace(Matrix& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double mx = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - mx).exp();
    s.row(r) /= s.row(r).sum();
  }
}

std::string sized(std::string_view field, std::size_t value) {
  return std::string(field) + " = " + std::to_string(value);
}

}  // namespace

ModelConfig ModelConfig::base_scale() {
  ModelConfig c;
  c.vocab_size = 16424;
  c.hidden_size = 768;
  c.num_layers = 12;
  c.num_heads = 12;
  c.intermediate_size = 3072;
  c.max_position = 512;
  c.type_vocab_size = 2;
  c.dropout_prob = 0.1;
  c.layer_norm_eps = 1e-12;
  c.initializer_range = 0.02;
  return c;
}

void ModelConfig::validate() const {
  const auto positive = [](std::string_view name, std::size_t v) {
    if (v < 1) throw InvalidArgument("model config: " + sized(name, v) + " must be >= 1");
  };
  positive("vocab_size", vocab_size);
  positive("hidden_size", hidden_size);
  positive("num_layers", num_layers);
  positive("num_heads", num_heads);
  positive("intermediate_size", intermediate_size);
  positive("max_position", max_position);
  positive("type_vocab_size", type_vocab_size);
  if (hidden_size % num_heads != 0) {
    throw InvalidArgument("model config: hidden_size " + std::to_string(hidden_size) +
                          " is not divisible by num_heads " + std::to_string(num_heads));
  }
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) {
    throw InvalidArgument("model config: dropout_prob must be in [0, 1)");
  }
  if (!(layer_norm_eps > 0.0)) throw InvalidArgument("model config: layer_norm_eps must be > 0");
  if (!(initializer_range >= 0.0)) throw InvalidArgument("model config: initializer_range must be >= 0");
}

std::string ModelConfig::to_json() const {
  json j;
  j["vocab_size"] = vocab_size;
  j["hidden_size"] = hidden_size;
  j["num_layers"] = num_layers;
  j["num_heads"] = num_heads;
  j["intermediate_size"] = intermediate_size;
  j["max_position"] = max_position;
  j["type_vocab_size"] = type_vocab_size;
  j["dropout_prob"] = dropout_prob;
  j["layer_norm_eps"] = layer_norm_eps;
  j["initializer_range"] = initializer_range;
  return j.dump();
}

ModelConfig ModelConfig::from_json(std::string_view text) { return from_json(text, ModelConfig{}); }

ModelConfig ModelConfig::from_json(std::string_view text, ModelConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("model config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "vocab_size") c.vocab_size = value.get<std::size_t>();
      else if (key == "hidden_size") c.hidden_size = value.get<std::size_t>();
      else if (key == "num_layers") c.num_layers = value.get<std::size_t>();
      else if (key == "num_heads") c.num_heads = value.get<std::size_t>();
      else if (key == "intermediate_size") c.intermediate_size = value.get<std::size_t>();
      else if (key == "max_position") c.max_position = value.get<std::size_t>();
      else if (key == "type_vocab_size") c.type_vocab_size = value.get<std::size_t>();
      else if (key == "dropout_prob") c.dropout_prob = value.get<double>();
      else if (key == "layer_norm_eps") c.layer_norm_eps = value.get<double>();
      else if (key == "initializer_range") c.initializer_range = value.get<double>();
      else throw ParseError("model config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  return c;
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
  config.validate();
  const auto H = static_cast<Eigen::Index>(config.hidden_size);
  const auto I = static_cast<Eigen::Index>(config.intermediate_size);
  const auto row = [](Eigen::Index n) { return Matrix::Zero(1, n); };
  ModelParams p;
  p.config = config;
  p.token_embedding = Matrix::Zero(static_cast<Eigen::Index>(config.vocab_size), H);
  p.position_embedding = Matrix::Zero(static_cast<Eigen::Index>(config.max_position), H);
  p.segment_embedding = Matrix::Zero(static_cast<Eigen::Index>(config.type_vocab_size), H);
  p.embedding_norm = {row(H), row(H)};
  p.layers.resize(config.num_layers);
  for (auto& l : p.layers) {
    l.query_weight = l.key_weight = l.value_weight = l.attention_output_weight = Matrix::Zero(H, H);
    l.query_bias = l.key_bias = l.value_bias = l.attention_output_bias = row(H);
    l.attention_norm = {row(H), row(H)};
    l.intermediate_weight = Matrix::Zero(H, I);
    l.intermediate_bias = row(I);
    l.output_weight = Matrix::Zero(I, H);
    l.output_bias = row(H);
    l.output_norm = {row(H), row(H)};
  }
  p.head_bias = row(static_cast<Eigen::Index>(config.vocab_size));
  return p;
}

namespace {

template <typename Params, typename Out>
void collect(Params& p, Out& out) {
  out.emplace_back("embeddings.token", &p.token_embedding);
  out.emplace_back("embeddings.position", &p.position_embedding);
  out.emplace_back("embeddings.segment", &p.segment_embedding);
  out.emplace_back("embeddings.norm.gain", &p.embedding_norm.gain);
  out.emplace_back("embeddings.norm.bias", &p.embedding_norm.bias);
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    auto& l = p.layers[i];
    const std::string pre = "layer." + std::to_string(i) + ".";
    out.emplace_back(pre + "attention.query.weight", &l.query_weight);
    out.emplace_back(pre + "attention.query.bias", &l.query_bias);
    out.emplace_back(pre + "attention.key.weight", &l.key_weight);
    out.emplace_back(pre + "attention.key.bias", &l.key_bias);
    out.emplace_back(pre + "attention.value.weight", &l.value_weight);
    out.emplace_back(pre + "attention.value.bias", &l.value_bias);
    out.emplace_back(pre + "attention.output.weight", &l.attention_output_weight);
    out.emplace_back(pre + "attention.output.bias", &l.attention_output_bias);
    out.emplace_back(pre + "attention.norm.gain", &l.attention_norm.gain);
    out.emplace_back(pre + "attention.norm.bias", &l.attention_norm.bias);
    out.emplace_back(pre + "intermediate.weight", &l.intermediate_weight);
    out.emplace_back(pre + "intermediate.bias", &l.intermediate_bias);
    out.emplace_back(pre + "output.weight", &l.output_weight);
    out.emplace_back(pre + "output.bias", &l.output_bias);
    out.emplace_back(pre + "output.norm.gain", &l.output_norm.gain);
    out.emplace_back(pre + "output.norm.bias", &l.output_norm.bias);
  }
  out.emplace_back("head.bias", &p.head_bias);
}

bool is_norm_gain(std::string_view name) { return name.ends_with("norm.gain"); }

}  // namespace

std::vector<std::pair<std::string, Matrix*>> ModelParams::named_tensors() {
  std::vector<std::pair<std::string, Matrix*>> out;
  collect(*this, out);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::named_tensors() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  collect(*this, out);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : named_tensors()) n += static_cast<std::size_t>(m->size());
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto& [name, m] : named_tensors()) {
    if (!m->allFinite()) return false;
  }
  return true;
}

std::uint64_t ModelParams::fingerprint() const {
  std::uint64_t h = fnv1a64(config.to_json());
  for (const auto& [name, m] : named_tensors()) {
    h = fnv1a64(name, h);
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(m->data()),
                                 static_cast<std::size_t>(m->size()) * sizeof(double)),
                h);
  }
  return h;
}

void ModelParams::set_zero() {
  for (auto& [name, m] : named_tensors()) m->setZero();
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  auto mine = named_tensors();
  const auto theirs = other.named_tensors();
  if (mine.size() != theirs.size()) throw InvalidArgument("parameter sets differ in layout");
  for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].second += scale * *theirs[i].second;
}

double ModelParams::squared_norm() const {
  double s = 0.0;
  for (const auto& [name, m] : named_tensors()) s += m->squaredNorm();
  return s;
}

bool bitwise_equal(const ModelParams& a, const ModelParams& b) {
  if (!(a.config == b.config)) return false;
  const auto ta = a.named_tensors();
  const auto tb = b.named_tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    const Matrix& x = *ta[i].second;
    const Matrix& y = *tb[i].second;
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    if (std::memcmp(x.data(), y.data(), static_cast<std::size_t>(x.size()) * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(config);
  Rng rng(seed);
  for (auto& [name, m] : p.named_tensors()) {
    if (is_norm_gain(name)) {
      m->setOnes();
    } else if (name.ends_with("weight") || (name.starts_with("embeddings.") && !name.ends_with("bias"))) {
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = config.initializer_range * rng.normal();
    }
  }
  return p;
}

void validate_input(const ModelConfig& config, const ModelInput& input) {
  const std::size_t n = input.ids.size();
  if (n == 0) throw InvalidArgument("empty input sequence");
  if (n > config.max_position) {
    throw InvalidArgument("sequence length " + std::to_string(n) + " exceeds max_position " +
                          std::to_string(config.max_position));
  }
  if (input.segments.size() != n) throw InvalidArgument("segment ids do not match sequence length");
  if (!input.padding.empty() && input.padding.size() != n) {
    throw InvalidArgument("padding mask does not match sequence length");
  }
  bool any_content = input.padding.empty();
  for (std::size_t i = 0; i < n; ++i) {
    if (input.ids[i] < 0 || static_cast<std::size_t>(input.ids[i]) >= config.vocab_size) {
      throw InvalidArgument("token id " + std::to_string(input.ids[i]) + " at position " +
                            std::to_string(i) + " is outside vocabulary of size " +
                            std::to_string(config.vocab_size));
    }
    if (input.segments[i] >= config.type_vocab_size) {
      throw InvalidArgument("segment id " + std::to_string(input.segments[i]) + " at position " +
                            std::to_string(i) + " is out of range");
    }
    if (!input.padding.empty() && input.padding[i] == 0) any_content = true;
  }
  if (!any_content) throw InvalidArgument("sequence is entirely padding");
}

ForwardOutput forward(const ModelParams& params, const ModelInput& input, Mode mode, Rng* rng,
                      ForwardCache* cache) {
  const ModelConfig& cfg = params.config;
  validate_input(cfg, input);
  const bool dropout = mode == Mode::kTrain && cfg.dropout_prob > 0.0;
  if (dropout && rng == nullptr) throw InvalidArgument("train-mode dropout needs a random generator");

  const auto S = static_cast<Eigen::Index>(input.ids.size());
  const auto H = static_cast<Eigen::Index>(cfg.hidden_size);
  const auto D = static_cast<Eigen::Index>(cfg.head_size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(D));

  ForwardCache local;
  ForwardCache& c = cache != nullptr ? *cache : local;
  c.ids.assign(input.ids.begin(), input.ids.end());
  c.segments.assign(input.segments.begin(), input.segments.end());
  c.layers.assign(cfg.num_layers, LayerCache{});

  Matrix embedded(S, H);
  for (Eigen::Index i = 0; i < S; ++i) {
    embedded.row(i) = params.token_embedding.row(input.ids[static_cast<std::size_t>(i)]) +
                      params.position_embedding.row(i) +
                      params.segment_embedding.row(input.segments[static_cast<std::size_t>(i)]);
  }

  ForwardOutput out;
  Matrix x = layer_norm(embedded, params.embedding_norm, cfg.layer_norm_eps, c.embedding_normed,
                        c.embedding_inv_std);
  c.embedding_mask.resize(0, 0);
  if (dropout) {
    c.embedding_mask = dropout_mask(S, H, cfg.dropout_prob, *rng);
    apply_mask(x, c.embedding_mask);
  }
  out.layer_hidden.push_back(x);

  // Additive key mask: padding keys get -inf.
  RowVector key_bias = RowVector::Zero(S);
  if (!input.padding.empty()) {
    for (Eigen::Index j = 0; j < S; ++j) {
      if (input.padding[static_cast<std::size_t>(j)] != 0) {
        key_bias(j) = -std::numeric_limits<double>::infinity();
      }
    }
  }

  for (std::size_t li = 0; li < cfg.num_layers; ++li) {
    const EncoderLayerParams& lp = params.layers[li];
    LayerCache& lc = c.layers[li];
    lc.input = x;
    lc.query = affine(x, lp.query_weight, lp.query_bias);
    lc.key = affine(x, lp.key_weight, lp.key_bias);
    lc.value = affine(x, lp.value_weight, lp.value_bias);
    lc.context.resize(S, H);
    lc.probs.resize(cfg.num_heads);
    lc.probs_mask.assign(dropout ? cfg.num_heads : 0, Matrix{});
    for (std::size_t h = 0; h < cfg.num_heads; ++h) {
      const auto col = static_cast<Eigen::Index>(h) * D;
      Matrix scores = lc.query.middleCols(col, D) * lc.key.middleCols(col, D).transpose() * scale;
      scores.rowwise() += key_bias;
      softmax_rows_inplace(scores);
      lc.probs[h] = scores;
      if (dropout) {
        lc.probs_mask[h] = dropout_mask(S, S, cfg.dropout_prob, *rng);
        scores.array() *= lc.probs_mask[h].array();
      }
      lc.context.middleCols(col, D).noalias() = scores * lc.value.middleCols(col, D);
    }
    Matrix attn = affine(lc.context, lp.attention_output_weight, lp.attention_output_bias);
    lc.attention_mask.resize(0, 0);
    if (dropout) {
      lc.attention_mask = dropout_mask(S, H, cfg.dropout_prob, *rng);
      apply_mask(attn, lc.attention_mask);
    }
    lc.attention_out = layer_norm(x + attn, lp.attention_norm, cfg.layer_norm_eps,
                                  lc.attention_normed, lc.attention_inv_std);

    lc.intermediate_pre = affine(lc.attention_out, lp.intermediate_weight, lp.intermediate_bias);
    lc.intermediate_act = lc.intermediate_pre.unaryExpr([](double v) { return gelu(v); });
    Matrix ffn = affine(lc.intermediate_act, lp.output_weight, lp.output_bias);
    lc.output_mask.resize(0, 0);
    if (dropout) {
      lc.output_mask = dropout_mask(S, H, cfg.dropout_prob, *rng);
      apply_mask(ffn, lc.output_mask);
    }
    x = layer_norm(lc.attention_out + ffn, lp.output_norm, cfg.layer_norm_eps, lc.output_normed,
                   lc.output_inv_std);
    out.layer_hidden.push_back(x);
  }

  c.final_hidden = x;
  out.logits = x * params.token_embedding.transpose();
  out.logits.rowwise() += params.head_bias.row(0);
  return out;
}

void backward(const ModelParams& params, const ForwardCache& c, const OutputGradients& upstream,
              ModelParams& g) {
  const ModelConfig& cfg = params.config;
  const auto S = static_cast<Eigen::Index>(c.ids.size());
  const auto H = static_cast<Eigen::Index>(cfg.hidden_size);
  const auto D = static_cast<Eigen::Index>(cfg.head_size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(D));
  const std::size_t L = cfg.num_layers;

  const bool has_rep = upstream.representation.size() != 0;
  if (has_rep) {
    if (upstream.representation_layer > L) throw InvalidArgument("representation layer out of range");
    if (upstream.representation.rows() != S || upstream.representation.cols() != H) {
      throw InvalidArgument("representation gradient has the wrong shape");
    }
  }
  const auto rep_grad_at = [&](std::size_t layer, Matrix& dx) {
    if (has_rep && upstream.representation_layer == layer) dx += upstream.representation;
  };

  Matrix dx = Matrix::Zero(S, H);
  if (upstream.logits.size() != 0) {
    if (upstream.logits.rows() != S || upstream.logits.cols() != params.token_embedding.rows()) {
      throw InvalidArgument("logit gradient has the wrong shape");
    }
    dx.noalias() += upstream.logits * params.token_embedding;
    g.token_embedding.noalias() += upstream.logits.transpose() * c.final_hidden;
    g.head_bias.row(0) += upstream.logits.colwise().sum();
  }
  rep_grad_at(L, dx);

  for (std::size_t li = L; li-- > 0;) {
    const EncoderLayerParams& lp = params.layers[li];
    EncoderLayerParams& lg = g.layers[li];
    const LayerCache& lc = c.layers[li];

    // Feed-forward block.
    const Matrix dres2 = layer_norm_backward(dx, lc.output_normed, lc.output_inv_std, lp.output_norm,
                                             lg.output_norm);
    Matrix dffn = dres2;
    apply_mask(dffn, lc.output_mask);
    Matrix dact = Matrix::Zero(S, static_cast<Eigen::Index>(cfg.intermediate_size));
    affine_backward(lc.intermediate_act, lp.output_weight, dffn, lg.output_weight, lg.output_bias, dact);
    const Matrix dpre = dact.array() * lc.intermediate_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
    Matrix dattn_out = dres2;
    affine_backward(lc.attention_out, lp.intermediate_weight, dpre, lg.intermediate_weight,
                    lg.intermediate_bias, dattn_out);

    // Attention block.
    const Matrix dres1 = layer_norm_backward(dattn_out, lc.attention_normed, lc.attention_inv_std,
                                             lp.attention_norm, lg.attention_norm);
    Matrix dattn = dres1;
    apply_mask(dattn, lc.attention_mask);
    Matrix dcontext = Matrix::Zero(S, H);
    affine_backward(lc.context, lp.attention_output_weight, dattn, lg.attention_output_weight,
                    lg.attention_output_bias, dcontext);

    Matrix dquery(S, H), dkey(S, H), dvalue(S, H);
    for (std::size_t h = 0; h < cfg.num_heads; ++h) {
      const auto col = static_cast<Eigen::Index>(h) * D;
      const Matrix& probs = lc.probs[h];
      Matrix dropped = probs;
      if (!lc.probs_mask.empty()) dropped.array() *= lc.probs_mask[h].array();
      const auto dctx = dcontext.middleCols(col, D);
      dvalue.middleCols(col, D).noalias() = dropped.transpose() * dctx;
      Matrix dprobs = dctx * lc.value.middleCols(col, D).transpose();
      if (!lc.probs_mask.empty()) dprobs.array() *= lc.probs_mask[h].array();
      Matrix dscores(S, S);
      for (Eigen::Index r = 0; r < S; ++r) {
        const double dot = dprobs.row(r).dot(probs.row(r));
        dscores.row(r) = probs.row(r).array() * (dprobs.row(r).array() - dot);
      }
      dscores *= scale;
      dquery.middleCols(col, D).noalias() = dscores * lc.key.middleCols(col, D);
      dkey.middleCols(col, D).noalias() = dscores.transpose() * lc.query.middleCols(col, D);
    }
    Matrix dinput = dres1;
    affine_backward(lc.input, lp.query_weight, dquery, lg.query_weight, lg.query_bias, dinput);
    affine_backward(lc.input, lp.key_weight, dkey, lg.key_weight, lg.key_bias, dinput);
    affine_backward(lc.input, lp.value_weight, dvalue, lg.value_weight, lg.value_bias, dinput);
    dx = std::move(dinput);
    rep_grad_at(li, dx);
  }

  apply_mask(dx, c.embedding_mask);
  const Matrix dembedded = layer_norm_backward(dx, c.embedding_normed, c.embedding_inv_std,
                                               params.embedding_norm, g.embedding_norm);
  for (Eigen::Index i = 0; i < S; ++i) {
    g.token_embedding.row(c.ids[static_cast<std::size_t>(i)]) += dembedded.row(i);
    g.position_embedding.row(i) += dembedded.row(i);
    g.segment_embedding.row(c.segments[static_cast<std::size_t>(i)]) += dembedded.row(i);
  }
}

Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

}  // namespace hanmlm
