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

#include "hanmlm/hanmlm.h"

#include <cstring>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hanmlm/checkpoint.hpp"
#include "hanmlm/corpus.hpp"
#include "hanmlm/error.hpp"
#include "hanmlm/eval.hpp"
#include "hanmlm/hangul.hpp"
#include "hanmlm/html.hpp"
#include "hanmlm/synthetic.hpp"
#include "hanmlm/tokenizer.hpp"
#include "hanmlm/training.hpp"
#include "hanmlm/utf8.hpp"

struct hm_corpus {
  hanmlm::Corpus value;
};
struct hm_vocab {
  hanmlm::Vocabulary value;
};
struct hm_model {
  hanmlm::ModelParams value;
};
struct hm_syllable_map {
  hanmlm::hangul::SyllableMap value;
};

namespace {

using json = nlohmann::ordered_json;

thread_local std::string last_error;

hm_status fail(hm_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename F>
hm_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return HM_OK;
  } catch (const hanmlm::Error& e) {
    switch (e.kind()) {
      case hanmlm::ErrorKind::kInvalidArgument: return fail(HM_ERR_INVALID_ARGUMENT, e.what());
      case hanmlm::ErrorKind::kIo: return fail(HM_ERR_IO, e.what());
      case hanmlm::ErrorKind::kParse: return fail(HM_ERR_PARSE, e.what());
      case hanmlm::ErrorKind::kNumeric: return fail(HM_ERR_NUMERIC, e.what());
    }
    return fail(HM_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HM_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) throw hanmlm::InvalidArgument(std::string(what) + " is null");
}

std::string report_json(const hanmlm::IngestReport& report) {
  json j;
  j["issues"] = json::array();
  for (const auto& issue : report.issues) j["issues"].push_back({{"line", issue.line}, {"message", issue.message}});
  return j.dump();
}

void put_report(char** out, const hanmlm::IngestReport& report) {
  if (out) *out = dup(report_json(report));
}

std::size_t shortest_position(const std::vector<const hanmlm::ModelParams*>& models) {
  std::size_t len = models.front()->config.max_position;
  for (const auto* m : models) len = std::min(len, m->config.max_position);
  return len;
}

std::vector<hanmlm::EncodedSequence> encode(const hm_corpus* corpus, const hm_vocab* vocab, std::size_t max_len) {
  const auto sentences = corpus->value.all_sentences();
  return hanmlm::encode_sentences(sentences, vocab->value, max_len);
}

hanmlm::EvalConfig eval_config_from(const char* text) {
  hanmlm::EvalConfig config;
  if (text && *text) {
    config = hanmlm::EvalConfig::from_json(text);
    // A repeat count without seeds means seeds 1..repeats.
    if (!json::parse(text).contains("seeds")) {
      config.seeds.clear();
      for (std::size_t r = 1; r <= config.repeats; ++r) config.seeds.push_back(r);
    }
  }
  config.validate();
  return config;
}

std::vector<hanmlm::MaskedDataset> prepare(const hm_corpus* const* datasets, const char* const* names,
                                           std::size_t count, const hm_vocab* vocab, std::size_t max_len,
                                           const hanmlm::EvalConfig& config) {
  if (count > 0) {
    need(datasets, "datasets");
    need(names, "dataset names");
  }
  std::vector<hanmlm::MaskedDataset> out;
  for (std::size_t d = 0; d < count; ++d) {
    need(datasets[d], "dataset");
    need(names[d], "dataset name");
    const auto encoded = encode(datasets[d], vocab, max_len);
    if (encoded.empty()) throw hanmlm::InvalidArgument(std::string("empty corpus: ") + names[d]);
    out.push_back(hanmlm::prepare_dataset(names[d], encoded, config));
  }
  return out;
}

bool is_sweep(const json& j) { return j.is_object() && j.contains("rows"); }

json parse_json(const char* text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw hanmlm::ParseError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

extern "C" {

const char* hm_last_error(void) { return last_error.c_str(); }
const char* hm_version(void) { return "0.1.0"; }
void hm_free_string(char* s) { std::free(s); }

hm_status hm_corpus_load_jsonl(const char* path, hm_corpus** out, char** report) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    hanmlm::IngestReport r;
    auto corpus = hanmlm::ingest_jsonl(path, r);
    put_report(report, r);
    *out = new hm_corpus{std::move(corpus)};
  });
}

hm_status hm_corpus_from_html_dir(const char* dir, const char* rules_json, hm_corpus** out, char** report) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    const auto rules = rules_json ? hanmlm::html::ExtractionRules::from_json(rules_json)
                                  : hanmlm::html::ExtractionRules{};
    auto ingest = hanmlm::html::ingest_html_dir(dir, rules);
    put_report(report, ingest.report);
    *out = new hm_corpus{std::move(ingest.corpus)};
  });
}

hm_status hm_corpus_from_nli_tsv(const char* path, hm_corpus** out, char** report) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    hanmlm::IngestReport r;
    const auto records = hanmlm::read_nli_tsv(path, r);
    put_report(report, r);
    *out = new hm_corpus{hanmlm::nli_to_corpus(records)};
  });
}

hm_status hm_corpus_synthetic(const char* language, size_t documents, size_t per_document, uint64_t seed,
                              hm_corpus** out) {
  return guarded([&] {
    need(language, "language");
    need(out, "out");
    const auto lang = hanmlm::synthetic::parse_language(language);
    *out = new hm_corpus{hanmlm::synthetic::corpus(lang, documents, per_document, seed)};
  });
}

hm_status hm_corpus_save_jsonl(const hm_corpus* corpus, const char* path) {
  return guarded([&] {
    need(corpus, "corpus");
    need(path, "path");
    hanmlm::save_jsonl(corpus->value, path);
  });
}

hm_status hm_corpus_split(const hm_corpus* corpus, double train_fraction, uint64_t seed, hm_corpus** train,
                          hm_corpus** test) {
  return guarded([&] {
    need(corpus, "corpus");
    need(train, "train");
    need(test, "test");
    auto [a, b] = hanmlm::split_corpus(corpus->value, train_fraction, seed);
    auto* ta = new hm_corpus{std::move(a)};
    *test = new hm_corpus{std::move(b)};
    *train = ta;
  });
}

hm_status hm_corpus_apply_map(const hm_corpus* corpus, const hm_syllable_map* map, hm_corpus** out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(map, "map");
    need(out, "out");
    hanmlm::Corpus mapped;
    for (auto doc : corpus->value.documents()) {
      for (auto& s : doc.sentences) s = hanmlm::hangul::apply_map(s, map->value);
      doc.title = hanmlm::hangul::apply_map(doc.title, map->value);
      mapped.add(std::move(doc));
    }
    *out = new hm_corpus{std::move(mapped)};
  });
}

hm_status hm_corpus_concat(const hm_corpus* a, const hm_corpus* b, hm_corpus** out) {
  return guarded([&] {
    need(a, "corpus");
    need(b, "corpus");
    need(out, "out");
    hanmlm::Corpus joined = a->value;
    for (const auto& doc : b->value.documents()) joined.add(doc);
    *out = new hm_corpus{std::move(joined)};
  });
}

size_t hm_corpus_document_count(const hm_corpus* corpus) { return corpus ? corpus->value.document_count() : 0; }
size_t hm_corpus_sentence_count(const hm_corpus* corpus) { return corpus ? corpus->value.sentence_count() : 0; }
void hm_corpus_free(hm_corpus* corpus) { delete corpus; }

hm_status hm_syllable_map_load(const char* path, hm_syllable_map** out) {
  return guarded([&] {
    need(out, "out");
    *out = new hm_syllable_map{path ? hanmlm::hangul::SyllableMap::load(path)
                                    : hanmlm::hangul::SyllableMap::builtin()};
  });
}

hm_status hm_syllable_map_apply(const hm_syllable_map* map, const char* text, char** out) {
  return guarded([&] {
    need(map, "map");
    need(text, "text");
    need(out, "out");
    *out = dup(hanmlm::hangul::apply_map(text, map->value));
  });
}

void hm_syllable_map_free(hm_syllable_map* map) { delete map; }

hm_status hm_find_novel(const hm_corpus* corpus, const hm_vocab* vocab, char** out_json) {
  return guarded([&] {
    need(corpus, "corpus");
    need(vocab, "vocab");
    need(out_json, "out");
    json j = json::array();
    for (const auto& c : hanmlm::hangul::find_novel_syllables(corpus->value, vocab->value)) {
      std::string s;
      hanmlm::utf8::append(s, c.syllable);
      j.push_back({{"syllable", s}, {"codepoint", static_cast<std::uint32_t>(c.syllable)}, {"count", c.count}});
    }
    *out_json = dup(j.dump());
  });
}

hm_status hm_vocab_build(const hm_corpus* corpus, size_t target_size, size_t min_frequency, hm_vocab** out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(out, "out");
    hanmlm::VocabBuildOptions options;
    options.target_size = target_size;
    options.min_frequency = min_frequency;
    *out = new hm_vocab{hanmlm::build_vocab(corpus->value, options)};
  });
}

hm_status hm_vocab_load(const char* path, hm_vocab** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new hm_vocab{hanmlm::Vocabulary::load(path)};
  });
}

hm_status hm_vocab_save(const hm_vocab* vocab, const char* path) {
  return guarded([&] {
    need(vocab, "vocab");
    need(path, "path");
    vocab->value.save(path);
  });
}

size_t hm_vocab_size(const hm_vocab* vocab) { return vocab ? vocab->value.size() : 0; }

hm_status hm_tokenize(const hm_vocab* vocab, const char* text, char** out_json) {
  return guarded([&] {
    need(vocab, "vocab");
    need(text, "text");
    need(out_json, "out");
    const auto t = hanmlm::tokenize(text, vocab->value);
    json j;
    j["tokens"] = json::array();
    for (auto id : t.ids) j["tokens"].push_back(vocab->value.token(id));
    j["ids"] = t.ids;
    j["word_starts"] = t.word_starts;
    *out_json = dup(j.dump());
  });
}

void hm_vocab_free(hm_vocab* vocab) { delete vocab; }

hm_status hm_resolve_config(const char* kind, const char* config_json, char** out_json) {
  return guarded([&] {
    need(kind, "kind");
    need(out_json, "out");
    const std::string k = kind;
    const char* text = config_json && *config_json ? config_json : "{}";
    if (k == "model") *out_json = dup(hanmlm::ModelConfig::from_json(text).to_json());
    else if (k == "train") *out_json = dup(hanmlm::TrainConfig::from_json(text).to_json());
    else if (k == "eval") *out_json = dup(eval_config_from(text).to_json());
    else throw hanmlm::InvalidArgument("unknown config kind '" + k + "'");
  });
}

hm_status hm_model_init(const char* config_json, const hm_vocab* vocab, uint64_t seed, hm_model** out) {
  return guarded([&] {
    need(out, "out");
    hanmlm::ModelConfig config;
    if (config_json && *config_json) config = hanmlm::ModelConfig::from_json(config_json);
    if (vocab) config.vocab_size = vocab->value.size();
    config.validate();
    *out = new hm_model{hanmlm::init_params(config, seed)};
  });
}

hm_status hm_model_load(const char* path, hm_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new hm_model{hanmlm::load_checkpoint(path)};
  });
}

hm_status hm_model_save(const hm_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    hanmlm::save_checkpoint(model->value, path);
  });
}

hm_status hm_model_config(const hm_model* model, char** out_json) {
  return guarded([&] {
    need(model, "model");
    need(out_json, "out");
    *out_json = dup(model->value.config.to_json());
  });
}

uint64_t hm_model_fingerprint(const hm_model* model) { return model ? model->value.fingerprint() : 0; }
void hm_model_free(hm_model* model) { delete model; }

hm_status hm_train(const hm_model* base, const hm_corpus* corpus, const hm_vocab* vocab,
                   const char* train_config_json, const char* out_dir, hm_model** trained, char** log_jsonl) {
  return guarded([&] {
    need(base, "base model");
    need(corpus, "corpus");
    need(vocab, "vocab");
    need(trained, "out");
    hanmlm::check_vocab_compatible(base->value.config, vocab->value);
    hanmlm::TrainConfig config;
    if (train_config_json && *train_config_json) config = hanmlm::TrainConfig::from_json(train_config_json);
    const auto data = encode(corpus, vocab, base->value.config.max_position);
    hanmlm::TrainOutputs outputs;
    if (out_dir) outputs.dir = out_dir;
    auto result = hanmlm::train(data, base->value, config, {}, outputs);
    if (log_jsonl) {
      std::string log;
      for (const auto& r : result.log) log += r.to_json() + "\n";
      *log_jsonl = dup(log);
    }
    *trained = new hm_model{std::move(result.params)};
  });
}

hm_status hm_evaluate(const hm_model* const* models, const char* const* model_names, size_t model_count,
                      const hm_corpus* const* datasets, const char* const* dataset_names, size_t dataset_count,
                      const hm_vocab* vocab, const char* eval_config_json, char** report_json) {
  return guarded([&] {
    need(models, "models");
    need(model_names, "model names");
    need(vocab, "vocab");
    need(report_json, "out");
    if (model_count == 0) throw hanmlm::InvalidArgument("no models to evaluate");
    std::vector<const hanmlm::ModelParams*> params;
    std::vector<hanmlm::NamedModel> named;
    for (std::size_t m = 0; m < model_count; ++m) {
      need(models[m], "model");
      need(model_names[m], "model name");
      hanmlm::check_vocab_compatible(models[m]->value.config, vocab->value);
      params.push_back(&models[m]->value);
      named.push_back({model_names[m], &models[m]->value});
    }
    const auto config = eval_config_from(eval_config_json);
    const auto data = prepare(datasets, dataset_names, dataset_count, vocab, shortest_position(params), config);
    *report_json = dup(hanmlm::evaluate(named, data, config).to_json());
  });
}

hm_status hm_sweep(const hm_model* base, const hm_corpus* train_corpus, const hm_corpus* const* datasets,
                   const char* const* dataset_names, size_t dataset_count, const hm_vocab* vocab,
                   const char* lambdas, const char* train_config_json, const char* eval_config_json,
                   char** report_json) {
  return guarded([&] {
    need(base, "base model");
    need(train_corpus, "train corpus");
    need(vocab, "vocab");
    need(lambdas, "lambdas");
    need(report_json, "out");
    hanmlm::check_vocab_compatible(base->value.config, vocab->value);
    const auto grid = hanmlm::parse_lambda_grid(lambdas);
    hanmlm::TrainConfig train_config;
    if (train_config_json && *train_config_json) {
      train_config = hanmlm::TrainConfig::from_json(train_config_json);
    }
    train_config.validate();
    const auto eval_config = eval_config_from(eval_config_json);
    const std::size_t max_len = base->value.config.max_position;
    const auto data = prepare(datasets, dataset_names, dataset_count, vocab, max_len, eval_config);
    const auto train_data = encode(train_corpus, vocab, max_len);
    *report_json = dup(hanmlm::sweep_lambda(grid, base->value, train_data, data, train_config, eval_config).to_json());
  });
}

hm_status hm_report_render(const char* report_json, const char* format, char** out) {
  return guarded([&] {
    need(report_json, "report");
    need(format, "format");
    need(out, "out");
    const auto fmt = hanmlm::parse_report_format(format);
    const json j = parse_json(report_json, "report");
    if (is_sweep(j)) {
      const auto r = hanmlm::SweepReport::from_json(report_json);
      *out = dup(fmt == hanmlm::ReportFormat::kJson ? r.to_json()
                 : fmt == hanmlm::ReportFormat::kCsv ? r.to_csv()
                                                     : r.to_table());
    } else {
      const auto r = hanmlm::EvalReport::from_json(report_json);
      *out = dup(fmt == hanmlm::ReportFormat::kJson ? r.to_json()
                 : fmt == hanmlm::ReportFormat::kCsv ? r.to_csv()
                                                     : r.to_table());
    }
  });
}

hm_status hm_report_curves(const char* report_json, const char* format, char** out) {
  return guarded([&] {
    need(report_json, "report");
    need(format, "format");
    need(out, "out");
    if (!is_sweep(parse_json(report_json, "report"))) {
      throw hanmlm::InvalidArgument("curves need a sweep report");
    }
    const auto r = hanmlm::SweepReport::from_json(report_json);
    const std::string f = format;
    if (f == "csv") *out = dup(hanmlm::curves_to_csv(r.curves));
    else if (f == "svg") *out = dup(hanmlm::curves_to_svg(r.curves, "cross-lingual L2 and scores per lambda"));
    else throw hanmlm::InvalidArgument("unknown curve format '" + f + "'");
  });
}

hm_status hm_representation_stray(const hm_model* current, const hm_model* base, const hm_corpus* corpus,
                                  const hm_vocab* vocab, size_t layer, double* out) {
  return guarded([&] {
    need(current, "current model");
    need(base, "base model");
    need(corpus, "corpus");
    need(vocab, "vocab");
    need(out, "out");
    hanmlm::check_vocab_compatible(current->value.config, vocab->value);
    const auto data = encode(corpus, vocab, std::min(current->value.config.max_position,
                                                     base->value.config.max_position));
    *out = hanmlm::representation_stray(current->value, base->value, data,
                                        layer == SIZE_MAX ? hanmlm::kFinalLayer : layer);
  });
}

}  // extern "C"
