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

#include "hanmlm/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hanmlm/checkpoint.hpp"
#include "hanmlm/error.hpp"

namespace hanmlm {
namespace {

using json = nlohmann::ordered_json;

class Adam {
 public:
  Adam(const ModelParams& shape, const TrainConfig& cfg)
      : m_(ModelParams::zeros(shape.config)), v_(ModelParams::zeros(shape.config)), cfg_(cfg) {}

  void step(ModelParams& params, const ModelParams& grads, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(t_));
    auto p = params.named_tensors();
    const auto g = grads.named_tensors();
    auto m = m_.named_tensors();
    auto v = v_.named_tensors();
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto& mi = *m[i].second;
      auto& vi = *v[i].second;
      const auto& gi = *g[i].second;
      mi = cfg_.adam_beta1 * mi + (1.0 - cfg_.adam_beta1) * gi;
      vi.array() = cfg_.adam_beta2 * vi.array() + (1.0 - cfg_.adam_beta2) * gi.array().square();
      p[i].second->array() -=
          lr * (mi.array() / c1) / ((vi.array() / c2).sqrt() + cfg_.adam_epsilon);
    }
  }

 private:
  ModelParams m_;
  ModelParams v_;
  const TrainConfig& cfg_;
  std::size_t t_ = 0;
};

double learning_rate_at(const TrainConfig& cfg, std::size_t step, std::size_t total) {
  const auto warmup = static_cast<std::size_t>(std::floor(cfg.warmup_fraction * static_cast<double>(total)));
  if (step < warmup) {
    return cfg.learning_rate * static_cast<double>(step + 1) / static_cast<double>(warmup);
  }
  if (cfg.schedule == LrSchedule::kWarmupConstant || total == warmup) return cfg.learning_rate;
  return cfg.learning_rate * static_cast<double>(total - step) / static_cast<double>(total - warmup);
}

std::string schedule_name(LrSchedule s) {
  return s == LrSchedule::kWarmupLinearDecay ? "warmup-linear-decay" : "warmup-constant";
}

}  // namespace

std::string to_string(MaskingScheme scheme) {
  return scheme == MaskingScheme::kMaskOnly ? "mask-only" : "bert-80-10-10";
}

MaskingScheme parse_masking_scheme(std::string_view text) {
  if (text == "mask-only" || text == "pure-mask") return MaskingScheme::kMaskOnly;
  if (text == "bert-80-10-10" || text == "bert") return MaskingScheme::kBert801010;
  throw InvalidArgument("unknown masking scheme '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be a finite value >= 0");
  if (!(mask_probability > 0.0 && mask_probability < 1.0)) {
    throw InvalidArgument("mask_probability must be in (0, 1)");
  }
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw InvalidArgument("warmup_fraction must be in [0, 1]");
  }
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (log_interval < 1) throw InvalidArgument("log_interval must be >= 1");
}

std::string TrainConfig::to_json() const {
  json j;
  j["lambda"] = lambda;
  j["mask_probability"] = mask_probability;
  j["learning_rate"] = learning_rate;
  j["warmup_fraction"] = warmup_fraction;
  j["schedule"] = schedule_name(schedule);
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_epsilon"] = adam_epsilon;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["masking"] = to_string(masking);
  j["representation_layer"] = representation_layer == kFinalLayer ? json("final") : json(representation_layer);
  j["log_interval"] = log_interval;
  j["checkpoint_every"] = checkpoint_every;
  j["log_timestamps"] = log_timestamps;
  return j.dump();
}

TrainConfig TrainConfig::from_json(std::string_view text) { return from_json(text, TrainConfig{}); }

TrainConfig TrainConfig::from_json(std::string_view text, TrainConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("train config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "lambda") c.lambda = value.get<double>();
      else if (key == "mask_probability") c.mask_probability = value.get<double>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "warmup_fraction") c.warmup_fraction = value.get<double>();
      else if (key == "schedule") {
        const auto s = value.get<std::string>();
        if (s == "warmup-linear-decay") c.schedule = LrSchedule::kWarmupLinearDecay;
        else if (s == "warmup-constant") c.schedule = LrSchedule::kWarmupConstant;
        else throw ParseError("train config: unknown schedule '" + s + "'");
      }
      else if (key == "adam_beta1") c.adam_beta1 = value.get<double>();
      else if (key == "adam_beta2") c.adam_beta2 = value.get<double>();
      else if (key == "adam_epsilon") c.adam_epsilon = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "masking") c.masking = parse_masking_scheme(value.get<std::string>());
      else if (key == "representation_layer") {
        c.representation_layer = value.is_string() && value.get<std::string>() == "final"
                                     ? kFinalLayer
                                     : value.get<std::size_t>();
      }
      else if (key == "log_interval") c.log_interval = value.get<std::size_t>();
      else if (key == "checkpoint_every") c.checkpoint_every = value.get<std::size_t>();
      else if (key == "log_timestamps") c.log_timestamps = value.get<bool>();
      else throw ParseError("train config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  return c;
}

MaskedSequence unmasked(const EncodedSequence& seq) {
  MaskedSequence out;
  out.input_ids = seq.ids;
  out.segments = seq.segments;
  out.content.resize(seq.ids.size());
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    const TokenId id = seq.ids[i];
    out.content[i] = (id == kClsId || id == kSepId || id == kPadId) ? 0 : 1;
  }
  return out;
}

MaskedSequence mask_sentence(const EncodedSequence& seq, double probability, MaskingScheme scheme,
                             std::size_t vocab_size, Rng& rng) {
  MaskedSequence out = unmasked(seq);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.content[i] != 0) candidates.push_back(i);
  }
  for (std::size_t i : candidates) {
    if (rng.bernoulli(probability)) out.mask_positions.push_back(i);
  }
  if (out.mask_positions.empty() && !candidates.empty()) {
    out.mask_positions.push_back(candidates[rng.below(candidates.size())]);
  }
  for (std::size_t pos : out.mask_positions) {
    out.targets.push_back(out.input_ids[pos]);
    TokenId replacement = kMaskId;
    if (scheme == MaskingScheme::kBert801010) {
      const double u = rng.uniform();
      if (u >= 0.9) {
        replacement = out.input_ids[pos];
      } else if (u >= 0.8 && vocab_size > kSpecialTokens.size()) {
        replacement = static_cast<TokenId>(kSpecialTokens.size() +
                                           rng.below(vocab_size - kSpecialTokens.size()));
      }
    }
    out.input_ids[pos] = replacement;
  }
  return out;
}

double mlm_loss(const ForwardOutput& output, const MaskedSequence& seq) {
  if (seq.mask_positions.empty()) throw InvalidArgument("no masked positions");
  double loss = 0.0;
  for (std::size_t k = 0; k < seq.mask_positions.size(); ++k) {
    const auto row = output.logits.row(static_cast<Eigen::Index>(seq.mask_positions[k]));
    const double mx = row.maxCoeff();
    const double lse = mx + std::log((row.array() - mx).exp().sum());
    loss += lse - row(seq.targets[k]);
  }
  return loss;
}

Matrix mlm_loss_gradient(const ForwardOutput& output, const MaskedSequence& seq) {
  if (seq.mask_positions.empty()) throw InvalidArgument("no masked positions");
  Matrix grad = Matrix::Zero(output.logits.rows(), output.logits.cols());
  for (std::size_t k = 0; k < seq.mask_positions.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(seq.mask_positions[k]);
    const auto row = output.logits.row(r);
    const double mx = row.maxCoeff();
    Eigen::RowVectorXd p = (row.array() - mx).exp();
    p /= p.sum();
    grad.row(r) += p;
    grad(r, seq.targets[k]) -= 1.0;
  }
  return grad;
}

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const MaskedSequence& seq) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || static_cast<std::size_t>(a.rows()) != seq.size()) {
    throw InvalidArgument("representation shapes differ: " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
}

bool counted(const MaskedSequence& seq, std::size_t i) {
  return seq.content[i] != 0 && (seq.padding.empty() || seq.padding[i] == 0);
}

}  // namespace

double cross_lingual_penalty(const Matrix& current, const Matrix& base, const MaskedSequence& seq) {
  check_same_shape(current, base, seq);
  double sum = 0.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (counted(seq, i)) {
      const auto r = static_cast<Eigen::Index>(i);
      sum += (base.row(r) - current.row(r)).squaredNorm();
    }
  }
  return sum;
}

double cross_lingual_penalty(const ForwardOutput& current, const ForwardOutput& base,
                             const MaskedSequence& seq) {
  return cross_lingual_penalty(current.hidden(), base.hidden(), seq);
}

Matrix cross_lingual_penalty_gradient(const Matrix& current, const Matrix& base,
                                      const MaskedSequence& seq) {
  check_same_shape(current, base, seq);
  Matrix grad = Matrix::Zero(current.rows(), current.cols());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (counted(seq, i)) {
      const auto r = static_cast<Eigen::Index>(i);
      grad.row(r) = 2.0 * (current.row(r) - base.row(r));
    }
  }
  return grad;
}

double mean_representation_distance(const Matrix& current, const Matrix& base,
                                     const MaskedSequence& seq) {
  check_same_shape(current, base, seq);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (counted(seq, i)) {
      const auto r = static_cast<Eigen::Index>(i);
      sum += (base.row(r) - current.row(r)).norm();
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::size_t resolve_layer(const ModelConfig& config, std::size_t layer) {
  if (layer == kFinalLayer) return config.num_layers;
  if (layer > config.num_layers) {
    throw InvalidArgument("representation layer " + std::to_string(layer) + " exceeds num_layers " +
                          std::to_string(config.num_layers));
  }
  return layer;
}

LossBreakdown sequence_loss(const ModelParams& params, const ForwardOutput* base_output,
                            const MaskedSequence& seq, double lambda, std::size_t layer, Mode mode,
                            Rng* dropout_rng, ModelParams* grads, double grad_scale) {
  const std::size_t rep_layer = resolve_layer(params.config, layer);
  if (base_output == nullptr && lambda != 0.0) throw InvalidArgument("penalty needs the base model output");

  ForwardCache cache;
  const ForwardOutput out = forward(params, seq.view(), mode, dropout_rng, grads ? &cache : nullptr);

  LossBreakdown loss;
  loss.mlm = mlm_loss(out, seq);
  if (base_output != nullptr) {
    const Matrix& cur = out.representation(rep_layer);
    const Matrix& ref = base_output->representation(rep_layer);
    loss.penalty = cross_lingual_penalty(cur, ref, seq);
    loss.distance = mean_representation_distance(cur, ref, seq);
  }
  loss.total = total_loss(loss.mlm, loss.penalty, lambda);

  if (grads != nullptr) {
    OutputGradients up;
    up.logits = grad_scale * mlm_loss_gradient(out, seq);
    if (lambda != 0.0) {
      up.representation = (grad_scale * lambda) *
          cross_lingual_penalty_gradient(out.representation(rep_layer),
                                         base_output->representation(rep_layer), seq);
      up.representation_layer = rep_layer;
    }
    backward(params, cache, up, *grads);
  }
  return loss;
}

std::string TrainRecord::to_json() const {
  json j;
  j["step"] = step;
  j["epoch"] = epoch;
  j["mlm_loss"] = mlm_loss;
  j["penalty"] = penalty;
  j["total_loss"] = total_loss;
  j["cross_lingual_l2"] = cross_lingual_l2;
  j["lr"] = lr;
  j["timestamp"] = timestamp ? json(*timestamp) : json(nullptr);
  return j.dump();
}

std::vector<EncodedSequence> encode_sentences(std::span<const std::string> sentences,
                                              const Vocabulary& vocab, std::size_t max_len) {
  std::vector<EncodedSequence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(encode_single(s, vocab, max_len));
  return out;
}

TrainResult train(std::span<const EncodedSequence> data, const ModelParams& initial,
                  const TrainConfig& config, const TrainCallbacks& callbacks,
                  const TrainOutputs& outputs) {
  config.validate();
  const std::size_t layer = resolve_layer(initial.config, config.representation_layer);
  if (!initial.all_finite()) throw NumericError("initial parameters are not finite");

  std::vector<const EncodedSequence*> usable;
  for (const auto& seq : data) {
    if (seq.size() > initial.config.max_position) {
      throw InvalidArgument("sequence of length " + std::to_string(seq.size()) +
                            " exceeds max_position");
    }
    if (std::any_of(seq.ids.begin(), seq.ids.end(), [](TokenId id) { return !is_special(id) || id == kUnkId || id == kMaskId; })) {
      usable.push_back(&seq);
    }
  }

  const BaseSnapshot base(initial);
  TrainResult result;
  result.params = initial;
  result.base_fingerprint_before = base.fingerprint();

  std::ofstream log_file;
  if (!outputs.dir.empty()) {
    std::filesystem::create_directories(outputs.dir);
    log_file.open(outputs.dir / "train_log.jsonl", std::ios::binary | std::ios::trunc);
    if (!log_file) throw IoError("cannot write " + (outputs.dir / "train_log.jsonl").string());
  }

  const std::size_t n = usable.size();
  const std::size_t steps_per_epoch = n == 0 ? 0 : (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;
  const auto start_time = std::chrono::steady_clock::now();

  Adam adam(initial, config);
  ModelParams grads = ModelParams::zeros(initial.config);
  ModelParams last_good = initial;
  std::size_t step = 0;

  struct Interval {
    double mlm = 0, penalty = 0, total = 0, distance = 0, lr = 0;
    std::size_t sentences = 0, steps = 0;
  } interval;

  const auto emit = [&](std::size_t epoch) {
    if (interval.sentences == 0) return;
    TrainRecord r;
    r.step = step;
    r.epoch = epoch;
    const double k = static_cast<double>(interval.sentences);
    r.mlm_loss = interval.mlm / k;
    r.penalty = interval.penalty / k;
    r.total_loss = interval.total / k;
    r.cross_lingual_l2 = interval.distance / k;
    r.lr = interval.lr / static_cast<double>(interval.steps);
    if (config.log_timestamps) {
      r.timestamp = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    }
    if (log_file.is_open()) log_file << r.to_json() << '\n' << std::flush;
    if (callbacks.on_record) callbacks.on_record(r);
    result.log.push_back(r);
    interval = {};
  };

  const auto diverged = [&](const std::string& what) {
    std::string where;
    if (!outputs.dir.empty()) {
      const auto path = outputs.dir / "last-good.ckpt";
      save_checkpoint(last_good, path);
      where = "; last good checkpoint: " + path.string();
    }
    throw NumericError("training diverged at step " + std::to_string(step) + " (" + what + ")" + where);
  };

  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, epoch));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      grads.set_zero();
      LossBreakdown batch;
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t index = order[k];
        Rng mask_rng(derive_seed(derive_seed(config.seed, 0x6d61736bULL + epoch), index));
        const MaskedSequence seq = mask_sentence(*usable[index], config.mask_probability, config.masking,
                                                 initial.config.vocab_size, mask_rng);
        const ForwardOutput base_out = base.forward(seq.view());
        Rng dropout_rng(derive_seed(mask_rng.next_u64(), step));
        const LossBreakdown l = sequence_loss(result.params, &base_out, seq, config.lambda, layer,
                                              Mode::kTrain, &dropout_rng, &grads, scale);
        batch.mlm += l.mlm;
        batch.penalty += l.penalty;
        batch.total += l.total;
        batch.distance += l.distance;
      }
      if (!std::isfinite(batch.total)) diverged("non-finite loss");

      const double lr = learning_rate_at(config, step, total_steps);
      last_good = result.params;
      adam.step(result.params, grads, lr);
      if (!result.params.all_finite()) diverged("non-finite parameters");
      ++step;

      interval.mlm += batch.mlm;
      interval.penalty += batch.penalty;
      interval.total += batch.total;
      interval.distance += batch.distance;
      interval.sentences += end - begin;
      interval.lr += lr;
      ++interval.steps;
      if (interval.steps == config.log_interval) emit(epoch);
    }
    emit(epoch);
    if (!outputs.dir.empty() && config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0) {
      save_checkpoint(result.params, outputs.dir / ("epoch-" + std::to_string(epoch) + ".ckpt"));
    }
    if (callbacks.on_epoch_end) callbacks.on_epoch_end(epoch, result.params);
  }

  if (!outputs.dir.empty()) save_checkpoint(result.params, outputs.dir / "model.ckpt");
  result.base_fingerprint_after = base.params().fingerprint();
  return result;
}

}  // namespace hanmlm
