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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hanmlm/eval.hpp"
#include "hanmlm/hangul.hpp"
#include "hanmlm/model.hpp"
#include "hanmlm/synthetic.hpp"
#include "hanmlm/tokenizer.hpp"
#include "hanmlm/training.hpp"
#include "hanmlm/utf8.hpp"
#include "reference_model.hpp"
#include "toy.hpp"

namespace fs = std::filesystem;
using namespace hanmlm;

namespace {

// Tolerances and budgets.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-4;
constexpr double kGradFloor = 1e-7;  // denominator floor for exactly-zero coordinates
constexpr double kGradBudgetSeconds = 60.0;
constexpr double kUniformTol = 1e-9;
constexpr double kForgetMinDrop = 15.0;
constexpr double kToyBudgetSeconds = 600.0;
constexpr double kRetainDropRatio = 0.5;
constexpr double kRetainMinGain = 10.0;
constexpr double kSlopeFraction = 0.05;
constexpr std::size_t kRandomWords = 1000;
constexpr std::size_t kSweepRows = 10;
constexpr double kSweepBudgetSeconds = 3600.0;

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---- 1 -------------------------------------------------------------------

void perturb(ModelParams& p, std::uint64_t seed, double sd) {
  Rng rng(seed);
  for (auto& [name, m] : p.named_tensors()) {
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] += sd * rng.normal();
  }
}

MaskedSequence grad_sequence() {
  // [CLS] 7 9 [MASK] [SEP] 12 [MASK] [SEP] [PAD]
  MaskedSequence s;
  s.input_ids = {kClsId, 7, 9, kMaskId, kSepId, 12, kMaskId, kSepId, kPadId};
  s.segments = {0, 0, 0, 0, 0, 1, 1, 1, 0};
  s.padding = {0, 0, 0, 0, 0, 0, 0, 0, 1};
  s.content = {0, 1, 1, 1, 0, 1, 1, 0, 0};
  s.mask_positions = {3, 6};
  s.targets = {15, 5};
  return s;
}

Verdict gradient_check() {
  const auto start = Clock::now();
  ModelConfig cfg;
  cfg.vocab_size = 20;
  cfg.hidden_size = 8;
  cfg.num_layers = 1;
  cfg.num_heads = 2;
  cfg.intermediate_size = 16;
  cfg.max_position = 9;
  cfg.dropout_prob = 0.0;
  const ModelParams base = init_params(cfg, 11);
  ModelParams current = base;
  perturb(current, 12, 0.3);
  const MaskedSequence seq = grad_sequence();
  const ForwardOutput base_out = forward(base, seq.view(), Mode::kEval);

  double worst = 0.0;
  std::string worst_name;
  std::size_t coords = 0;
  for (double lambda : {0.0, 0.5}) {
    ModelParams grads = ModelParams::zeros(cfg);
    sequence_loss(current, &base_out, seq, lambda, kFinalLayer, Mode::kEval, nullptr, &grads);
    ModelParams probe = current;
    auto probe_tensors = probe.named_tensors();
    const auto grad_tensors = std::as_const(grads).named_tensors();
    for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
      Matrix& m = *probe_tensors[t].second;
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double keep = m.data()[i];
        m.data()[i] = keep + kGradStep;
        const auto up = reference::total_loss(probe, base, seq, lambda, cfg.num_layers);
        m.data()[i] = keep - kGradStep;
        const auto down = reference::total_loss(probe, base, seq, lambda, cfg.num_layers);
        m.data()[i] = keep;
        const double numeric = static_cast<double>((up - down) / (2.0L * kGradStep));
        const double analytic = grad_tensors[t].second->data()[i];
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
        if (rel > worst) {
          worst = rel;
          worst_name = probe_tensors[t].first + " (lambda " + fmt("%g", lambda) + ")";
        }
        ++coords;
      }
    }
  }
  const double elapsed = seconds_since(start);
  Verdict v;
  v.pass = worst < kGradRelTol && elapsed < kGradBudgetSeconds;
  v.detail = std::to_string(coords) + " coordinates, max relative error " + fmt("%.3e", worst) + " at " +
             worst_name + ", " + fmt("%.1fs", elapsed);
  return v;
}

// ---- 2 -------------------------------------------------------------------

Verdict loss_identities() {
  Verdict v;
  bool ok = true;
  std::ostringstream detail;

  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double m = rng.uniform() * 50.0, p = rng.uniform() * 1e6;
    if (total_loss(m, p, 0.0) != m) ok = false;
  }

  ModelConfig cfg;
  cfg.vocab_size = 30;
  cfg.hidden_size = 8;
  cfg.num_layers = 2;
  cfg.num_heads = 2;
  cfg.intermediate_size = 16;
  cfg.max_position = 9;
  cfg.dropout_prob = 0.0;
  const ModelParams model = init_params(cfg, 3);
  const MaskedSequence seq = grad_sequence();
  const ForwardOutput out = forward(model, seq.view(), Mode::kEval);
  const LossBreakdown l = sequence_loss(model, &out, seq, 0.0, kFinalLayer, Mode::kEval, nullptr, nullptr);
  if (l.total != l.mlm) ok = false;
  for (std::size_t layer = 0; layer <= cfg.num_layers; ++layer) {
    if (cross_lingual_penalty(out.representation(layer), out.representation(layer), seq) != 0.0) ok = false;
  }
  detail << "total(m,p,0)=m " << (ok ? "exact" : "violated") << "; penalty(f,f)=0 exact";

  double worst = 0.0;
  for (std::size_t M : {20u, 2000u}) {
    ModelConfig u = cfg;
    u.vocab_size = M;
    const ModelParams uniform = ModelParams::zeros(u);
    std::vector<EncodedSequence> sentences;
    Rng ids(M);
    for (int s = 0; s < 20; ++s) {
      EncodedSequence e;
      e.ids = {kClsId};
      for (int k = 0; k < 6; ++k) e.ids.push_back(static_cast<TokenId>(5 + ids.below(M - 5)));
      e.ids.push_back(kSepId);
      e.segments.assign(e.ids.size(), 0);
      e.word_starts.assign(e.ids.size(), 1);
      sentences.push_back(e);
    }
    EvalConfig ec;
    const MaskedDataset data = prepare_dataset("uniform", sentences, ec);
    for (double lp : log_perplexity(uniform, data, Normalization::kPerToken)) {
      worst = std::max(worst, std::abs(lp - std::log(static_cast<double>(M))));
    }
  }
  detail << "; uniform log-perplexity vs ln M max deviation " << fmt("%.2e", worst);
  v.pass = ok && worst < kUniformTol;
  v.detail = detail.str();
  return v;
}

// ---- 3, 4, 5, 9 ----------------------------------------------------------

struct ToyRuns {
  toy::Data data;
  ModelParams base;
  double pretrain_seconds = 0.0;
  std::vector<MaskedDataset> tests;
  ModelScore base_score, plain_score, regularized_score;
  double plain_seconds = 0.0, regularized_seconds = 0.0;
  std::vector<TrainRecord> plain_log;
};

ToyRuns toy_runs() {
  ToyRuns r;
  auto t = Clock::now();
  r.data = toy::make_data();
  r.base = toy::pretrain(r.data);
  r.tests = toy::test_sets(r.data);
  r.base_score = evaluate_model("base", r.base, r.tests);
  r.pretrain_seconds = seconds_since(t);

  t = Clock::now();
  const auto plain = train(r.data.train_b, r.base, toy::continue_config(0.0));
  r.plain_score = evaluate_model("lambda=0", plain.params, r.tests);
  r.plain_log = plain.log;
  r.plain_seconds = seconds_since(t);

  t = Clock::now();
  const auto reg = train(r.data.train_b, r.base, toy::continue_config(0.3));
  r.regularized_score = evaluate_model("lambda=0.3", reg.params, r.tests);
  r.regularized_seconds = seconds_since(t);
  return r;
}

double accuracy(const ModelScore& s, const std::string& dataset) {
  for (const auto& d : s.datasets) {
    if (d.dataset == dataset) return d.accuracy;
  }
  return NAN;
}

Verdict forgetting(const ToyRuns& r) {
  const double before = accuracy(r.base_score, "A"), after = accuracy(r.plain_score, "A");
  const double elapsed = r.pretrain_seconds + r.plain_seconds;
  Verdict v;
  v.pass = before - after >= kForgetMinDrop && elapsed < kToyBudgetSeconds;
  v.detail = "accuracy on A " + fmt("%.2f", before) + " -> " + fmt("%.2f", after) + " (drop " +
             fmt("%.2f", before - after) + "), " + fmt("%.1fs", elapsed);
  return v;
}

Verdict retention(const ToyRuns& r) {
  const double base_a = accuracy(r.base_score, "A"), base_b = accuracy(r.base_score, "B");
  const double plain_drop = base_a - accuracy(r.plain_score, "A");
  const double drop = base_a - accuracy(r.regularized_score, "A");
  const double gain = accuracy(r.regularized_score, "B") - base_b;
  const double elapsed = r.pretrain_seconds + r.regularized_seconds;
  Verdict v;
  v.pass = drop < kRetainDropRatio * plain_drop && gain >= kRetainMinGain && elapsed < kToyBudgetSeconds;
  v.detail = "lambda=0.3 drop on A " + fmt("%.2f", drop) + " vs lambda=0 drop " + fmt("%.2f", plain_drop) +
             ", gain on B " + fmt("%.2f", gain) + ", " + fmt("%.1fs", elapsed);
  return v;
}

// Least-squares slope of the last quarter of a curve, per epoch.
double tail_slope_per_epoch(const std::vector<std::pair<double, double>>& curve, double steps_per_epoch) {
  const double last = curve.back().first;
  std::vector<std::pair<double, double>> tail;
  for (const auto& p : curve) {
    if (p.first >= 0.75 * last) tail.push_back(p);
  }
  if (tail.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (const auto& [x, y] : tail) mx += x, my += y;
  mx /= tail.size();
  my /= tail.size();
  double sxy = 0, sxx = 0;
  for (const auto& [x, y] : tail) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  return sxx == 0 ? 0.0 : sxy / sxx * steps_per_epoch;
}

Verdict stray_curves(const ToyRuns& r, const SweepReport& sweep) {
  const std::size_t steps_per_epoch = (r.data.train_b.size() + toy::continue_config(0).batch_size - 1) /
                                      toy::continue_config(0).batch_size;
  const double plain_final = r.plain_log.back().cross_lingual_l2;
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  for (const auto& p : sweep.curves) {
    const auto slash = p.series.find("/cross_lingual_l2");
    if (slash == std::string::npos) continue;
    curves[p.series.substr(0, slash)].push_back({static_cast<double>(p.step), p.value});
  }
  bool ok = curves.size() == kSweepRows;
  double worst_ratio = 0.0, highest_final = 0.0;
  for (const auto& [name, curve] : curves) {
    double peak = 0.0;
    for (const auto& pt : curve) peak = std::max(peak, pt.second);
    const double slope = tail_slope_per_epoch(curve, static_cast<double>(steps_per_epoch));
    const double ratio = peak > 0 ? std::abs(slope) / peak : 0.0;
    worst_ratio = std::max(worst_ratio, ratio);
    highest_final = std::max(highest_final, curve.back().second);
    if (!(curve.back().second < plain_final) || !(ratio < kSlopeFraction)) ok = false;
  }
  Verdict v;
  v.pass = ok;
  v.detail = "final L2 lambda=0 " + fmt("%.3f", plain_final) + " vs max over lambda>0 " +
             fmt("%.3f", highest_final) + "; worst last-quartile slope " + fmt("%.4f", worst_ratio) +
             " of curve max per epoch over " + std::to_string(curves.size()) + " curves";
  return v;
}

Verdict sweep_grid(const SweepReport& s, double elapsed) {
  bool ok = s.rows.size() == kSweepRows;
  for (const auto& row : s.rows) {
    if (!row.score || row.score->datasets.size() != 2) {
      ok = false;
      continue;
    }
    double lp = 0, acc = 0;
    for (const auto& d : row.score->datasets) {
      if (!std::isfinite(d.log_perplexity) || !std::isfinite(d.accuracy)) ok = false;
      lp += d.log_perplexity / 2.0;
      acc += d.accuracy / 2.0;
    }
    if (std::abs(lp - row.score->average_log_perplexity) > 1e-12 ||
        std::abs(acc - row.score->average_accuracy) > 1e-12) {
      ok = false;
    }
  }
  const std::string table = s.to_table();
  const auto lines = std::count(table.begin(), table.end(), '\n');
  ok = ok && lines == static_cast<long>(kSweepRows + 4) && elapsed < kSweepBudgetSeconds;
  Verdict v;
  v.pass = ok;
  v.detail = std::to_string(s.rows.size()) + " lambda rows x " + std::to_string(s.datasets.size()) +
             " datasets x {perplexity, accuracy} + averages, " + fmt("%.1fs", elapsed);
  return v;
}

// ---- 6 -------------------------------------------------------------------

// Can word[i..] be split into vocabulary pieces ("##" after the first)?
bool segmentable(const std::vector<std::string>& chars, const Vocabulary& vocab) {
  const std::size_t n = chars.size();
  std::vector<char> ok(n + 1, 0);
  ok[n] = 1;
  for (std::size_t i = n; i-- > 0;) {
    std::string piece;
    for (std::size_t j = i; j < n && !ok[i]; ++j) {
      piece += chars[j];
      if (ok[j + 1] && vocab.contains(i == 0 ? piece : "##" + piece)) ok[i] = 1;
    }
  }
  return ok[0];
}

bool longest_match_segmentation(const std::vector<std::string>& pieces, const std::vector<std::string>& chars,
                                const Vocabulary& vocab) {
  std::size_t pos = 0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    std::string expect;
    std::size_t len = 0;
    std::string acc;
    for (std::size_t j = pos; j < chars.size(); ++j) {
      acc += chars[j];
      if (vocab.contains(pos == 0 ? acc : "##" + acc)) {
        expect = pos == 0 ? acc : "##" + acc;
        len = j - pos + 1;
      }
    }
    if (len == 0 || pieces[k] != expect) return false;
    pos += len;
  }
  return pos == chars.size();
}

Verdict tokenizer_oracle() {
  using hanmlm::synthetic::Language;
  auto corpus = hanmlm::synthetic::sentences(Language::kA, 500, 4);
  const auto b = hanmlm::synthetic::sentences(Language::kB, 500, 4);
  corpus.insert(corpus.end(), b.begin(), b.end());
  VocabBuildOptions options;
  options.target_size = 150;
  const Vocabulary vocab = build_vocab(corpus, options);

  std::vector<std::string> alphabet, plain, continued;
  for (const auto& t : vocab.tokens()) {
    if (is_special(*vocab.find(t))) continue;
    (t.starts_with("##") ? continued : plain).push_back(t);
    const std::string body = t.starts_with("##") ? t.substr(2) : t;
    for (char32_t c : utf8::decode(body)) alphabet.push_back(utf8::encode(std::u32string(1, c)));
  }
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  for (const char* extra : {"돎", "췰", "뷁"}) {
    if (std::find(alphabet.begin(), alphabet.end(), extra) == alphabet.end()) alphabet.push_back(extra);
  }

  Rng rng(2024);
  std::size_t agree = 0, unk = 0;
  for (std::size_t w = 0; w < kRandomWords; ++w) {
    // Even words glue vocabulary pieces together, odd ones draw raw characters.
    std::string word;
    if (w % 2 == 0) {
      const std::size_t parts = 1 + rng.below(4);
      for (std::size_t k = 0; k < parts; ++k) {
        const std::vector<std::string>& pool = k == 0 ? plain : continued;
        const std::string& t = pool[rng.below(pool.size())];
        word += k == 0 ? t : t.substr(2);
      }
    } else {
      for (std::size_t k = 0, n = 1 + rng.below(6); k < n; ++k) word += alphabet[rng.below(alphabet.size())];
    }
    std::vector<std::string> chars;
    for (char32_t c : utf8::decode(word)) chars.push_back(utf8::encode(std::u32string(1, c)));
    const auto pieces = wordpiece(word, vocab);
    const bool greedy_unk = pieces.size() == 1 && pieces[0] == "[UNK]";
    const bool valid = segmentable(chars, vocab);
    if (greedy_unk) ++unk;
    if (greedy_unk ? !valid : (valid && longest_match_segmentation(pieces, chars, vocab))) ++agree;
  }

  // A vocabulary with every syllable of the two words except the novel ones.
  const Vocabulary small = build_vocab(std::vector<std::string>{"에도 도이 란드 에이 도란 이드 드도 에란"}, {});
  bool lacks = true;
  for (const auto& t : small.tokens()) {
    if (t.find("돎") != std::string::npos || t.find("췰") != std::string::npos) lacks = false;
  }
  const auto w1 = tokenize("에돎도", small).ids;
  const auto w2 = tokenize("도이췰란드", small).ids;
  const auto control = tokenize("도이란드 에도", small).ids;
  const bool examples = lacks && w1 == std::vector<TokenId>{kUnkId} && w2 == std::vector<TokenId>{kUnkId} &&
                        std::count(control.begin(), control.end(), kUnkId) == 0;

  Verdict v;
  v.pass = agree == kRandomWords && examples;
  v.detail = std::to_string(agree) + "/" + std::to_string(kRandomWords) + " random words agree (" +
             std::to_string(unk) + " [UNK]); 에돎도 -> " + (w1 == std::vector<TokenId>{kUnkId} ? "[UNK]" : "pieces") +
             ", 도이췰란드 -> " + (w2 == std::vector<TokenId>{kUnkId} ? "[UNK]" : "pieces");
  return v;
}

// ---- 7 -------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int sh(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "hanmlm-acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = std::string("\"") + HANMLM_CLI + "\"";
  const std::string d = "\"" + dir.string() + "\"";
  bool ok = true;
  ok &= sh(cli + " synth --language A --documents 40 --per-document 10 --seed 1 --out " + d + "/a.jsonl") == 0;
  ok &= sh(cli + " synth --language B --documents 20 --per-document 10 --seed 1 --out " + d + "/b.jsonl") == 0;
  ok &= sh(cli + " build-vocab --corpus " + d + "/a.jsonl --corpus " + d + "/b.jsonl --size 120 --out " + d +
           "/vocab.txt") == 0;
  ok &= sh(cli + " train --init --corpus " + d + "/a.jsonl --vocab " + d +
           "/vocab.txt --hidden 16 --layers 1 --heads 2 --intermediate 32 --max-position 32 --dropout 0.1"
           " --epochs 2 --lr 2e-3 --batch-size 16 --out " + d + "/base") == 0;
  for (const char* run : {"run1", "run2"}) {
    ok &= sh(cli + " train --base " + d + "/base/model.ckpt --corpus " + d + "/b.jsonl --vocab " + d +
             "/vocab.txt --lambda 0.3 --epochs 2 --lr 1e-3 --batch-size 8 --seed 5 --log-interval 3 --out " + d +
             "/" + run) == 0;
    ok &= sh(cli + " evaluate --model base=" + d + "/base/model.ckpt --model tuned=" + d + "/" + run +
             "/model.ckpt --dataset A=" + d + "/a.jsonl --dataset B=" + d + "/b.jsonl --vocab " + d +
             "/vocab.txt --out " + d + "/" + run + "/report.json") == 0;
  }
  const auto same = [&](const char* name) {
    const std::string a = slurp(dir / "run1" / name), b = slurp(dir / "run2" / name);
    return !a.empty() && a == b;
  };
  const bool log = ok && same("train_log.jsonl");
  const bool ckpt = ok && same("model.ckpt");
  const bool report = ok && same("report.json");
  Verdict v;
  v.pass = ok && log && ckpt && report;
  v.detail = std::string("commands ") + (ok ? "ok" : "failed") + "; train_log.jsonl " +
             (log ? "identical" : "differs") + ", model.ckpt " + (ckpt ? "identical" : "differs") +
             ", report.json " + (report ? "identical" : "differs");
  if (v.pass) fs::remove_all(dir);
  return v;
}

// ---- 8 -------------------------------------------------------------------

Verdict syllable_algebra() {
  std::size_t round_trips = 0, jamo = 0;
  char32_t expected = 0xAC00;
  for (int i = 0; i < 19; ++i) {
    for (int m = 0; m < 21; ++m) {
      for (int f = 0; f < 28; ++f, ++expected) {
        const auto s = hangul::decompose(expected);
        if (s && s->initial == i && s->medial == m && s->final == f && hangul::compose(i, m, f) == expected) {
          ++round_trips;
        }
        std::u32string seq = {static_cast<char32_t>(0x1100 + i), static_cast<char32_t>(0x1161 + m)};
        if (f) seq.push_back(static_cast<char32_t>(0x11A7 + f));
        if (hangul::compose_jamo(seq) == std::u32string(1, expected)) ++jamo;
      }
    }
  }
  const std::vector<std::pair<std::string, std::string>> table = {
      {"돐", "주년"}, {"췰", "칠"}, {"꾜", "쿄"}, {"뙈", "떼"}, {"곬", "골"}, {"윁", "베트"}};
  const auto map = hangul::SyllableMap::builtin();
  std::size_t mapped = 0;
  for (const auto& [from, to] : table) {
    if (hangul::apply_map("x" + from + "y", map) == "x" + to + "y") ++mapped;
  }
  const bool sentence = hangul::apply_map("돐 윁남 도이췰란드 꾜또 뙈기 곬목", map) == "주년 베트남 도이칠란드 쿄또 떼기 골목";
  Verdict v;
  v.pass = round_trips == 11172 && jamo == 11172 && mapped == table.size() && map.size() == table.size() && sentence;
  v.detail = std::to_string(round_trips) + "/11172 round trips, " + std::to_string(jamo) +
             "/11172 jamo compositions, " + std::to_string(mapped) + "/6 mappings";
  return v;
}

}  // namespace

int main() {
  std::map<int, Verdict> verdicts;
  const auto run = [&](int id, auto&& fn) {
    std::cerr << "criterion " << id << "...\n";
    try {
      verdicts[id] = fn();
    } catch (const std::exception& e) {
      verdicts[id] = {false, std::string("exception: ") + e.what()};
    }
  };

  run(1, gradient_check);
  run(2, loss_identities);
  run(6, tokenizer_oracle);
  run(7, determinism);
  run(8, syllable_algebra);

  std::optional<ToyRuns> toy;
  try {
    std::cerr << "toy pretraining and continued training...\n";
    toy = toy_runs();
  } catch (const std::exception& e) {
    for (int id : {3, 4, 5, 9}) verdicts[id] = {false, std::string("exception: ") + e.what()};
  }
  if (toy) {
    run(3, [&] { return forgetting(*toy); });
    run(4, [&] { return retention(*toy); });
    std::optional<SweepReport> sweep;
    double sweep_seconds = 0.0;
    try {
      std::cerr << "lambda sweep...\n";
      const auto t = Clock::now();
      const auto grid = parse_lambda_grid("0.1:1.0:0.1");
      sweep = sweep_lambda(grid, toy->base, toy->data.train_b, toy->tests, toy::continue_config(0.0), EvalConfig{});
      sweep_seconds = seconds_since(t);
    } catch (const std::exception& e) {
      for (int id : {5, 9}) verdicts[id] = {false, std::string("exception: ") + e.what()};
    }
    if (sweep) {
      run(5, [&] { return stray_curves(*toy, *sweep); });
      run(9, [&] { return sweep_grid(*sweep, sweep_seconds); });
      std::cout << sweep->to_table();
    }
  }

  static const char* names[] = {"",
                                "gradient correctness",
                                "loss identities",
                                "catastrophic forgetting",
                                "retention with regularization",
                                "stray curves",
                                "tokenizer oracle equivalence",
                                "determinism",
                                "syllable algebra",
                                "lambda sweep grid"};
  bool all = true;
  for (int id = 1; id <= 9; ++id) {
    const Verdict& v = verdicts[id];
    all &= v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << names[id] << " - " << v.detail << '\n';
  }
  return all ? 0 : 1;
}
