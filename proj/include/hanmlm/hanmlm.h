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

#ifndef HANMLM_HANMLM_H_
#define HANMLM_HANMLM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HM_API __declspec(dllexport)
#else
#define HM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  HM_OK = 0,
  HM_ERR_INVALID_ARGUMENT = 1,
  HM_ERR_IO = 2,
  HM_ERR_PARSE = 3,
  HM_ERR_NUMERIC = 4,
  HM_ERR_INTERNAL = 5,
} hm_status;

typedef struct hm_corpus hm_corpus;
typedef struct hm_vocab hm_vocab;
typedef struct hm_model hm_model;
typedef struct hm_syllable_map hm_syllable_map;

// Message of the last failed call on this thread; "" after success.
HM_API const char* hm_last_error(void);
HM_API const char* hm_version(void);
// Every char* handed out by this library must be released here.
HM_API void hm_free_string(char* s);

// Corpus. *report_json receives {"issues":[{"line":n,"message":..}],...}
// and may be NULL when not wanted.
HM_API hm_status hm_corpus_load_jsonl(const char* path, hm_corpus** out, char** report_json);
HM_API hm_status hm_corpus_from_html_dir(const char* dir, const char* rules_json, hm_corpus** out,
                                         char** report_json);
HM_API hm_status hm_corpus_from_nli_tsv(const char* path, hm_corpus** out, char** report_json);
HM_API hm_status hm_corpus_synthetic(const char* language, size_t documents, size_t per_document,
                                     uint64_t seed, hm_corpus** out);
HM_API hm_status hm_corpus_save_jsonl(const hm_corpus* corpus, const char* path);
HM_API hm_status hm_corpus_split(const hm_corpus* corpus, double train_fraction, uint64_t seed,
                                 hm_corpus** train, hm_corpus** test);
HM_API hm_status hm_corpus_apply_map(const hm_corpus* corpus, const hm_syllable_map* map, hm_corpus** out);
// Documents of a followed by those of b; ids must stay unique.
HM_API hm_status hm_corpus_concat(const hm_corpus* a, const hm_corpus* b, hm_corpus** out);
HM_API size_t hm_corpus_document_count(const hm_corpus* corpus);
HM_API size_t hm_corpus_sentence_count(const hm_corpus* corpus);
HM_API void hm_corpus_free(hm_corpus* corpus);

// Syllable maps. path NULL in hm_syllable_map_load gives the builtin map.
HM_API hm_status hm_syllable_map_load(const char* path, hm_syllable_map** out);
HM_API hm_status hm_syllable_map_apply(const hm_syllable_map* map, const char* text, char** out);
HM_API void hm_syllable_map_free(hm_syllable_map* map);
// [{"syllable":"돐","codepoint":46112,"count":3},...]
HM_API hm_status hm_find_novel(const hm_corpus* corpus, const hm_vocab* vocab, char** out_json);

// Vocabulary.
HM_API hm_status hm_vocab_build(const hm_corpus* corpus, size_t target_size, size_t min_frequency,
                                hm_vocab** out);
HM_API hm_status hm_vocab_load(const char* path, hm_vocab** out);
HM_API hm_status hm_vocab_save(const hm_vocab* vocab, const char* path);
HM_API size_t hm_vocab_size(const hm_vocab* vocab);
// {"tokens":[...],"ids":[...],"word_starts":[...]}
HM_API hm_status hm_tokenize(const hm_vocab* vocab, const char* text, char** out_json);
HM_API void hm_vocab_free(hm_vocab* vocab);

// Fills every field of a "model", "train" or "eval" config from its
// defaults; unknown keys are an error.
HM_API hm_status hm_resolve_config(const char* kind, const char* config_json, char** out_json);

// Models. config_json uses ModelConfig field names; NULL means defaults.
HM_API hm_status hm_model_init(const char* config_json, const hm_vocab* vocab, uint64_t seed, hm_model** out);
HM_API hm_status hm_model_load(const char* path, hm_model** out);
HM_API hm_status hm_model_save(const hm_model* model, const char* path);
HM_API hm_status hm_model_config(const hm_model* model, char** out_json);
HM_API uint64_t hm_model_fingerprint(const hm_model* model);
HM_API void hm_model_free(hm_model* model);

// Continued pretraining from base. out_dir may be NULL; otherwise the log
// and checkpoints are written there. *log_jsonl receives the TrainLog.
HM_API hm_status hm_train(const hm_model* base, const hm_corpus* corpus, const hm_vocab* vocab,
                          const char* train_config_json, const char* out_dir, hm_model** trained,
                          char** log_jsonl);

// Scores every model on every dataset; *report_json is an evaluation report.
HM_API hm_status hm_evaluate(const hm_model* const* models, const char* const* model_names, size_t model_count,
                             const hm_corpus* const* datasets, const char* const* dataset_names,
                             size_t dataset_count, const hm_vocab* vocab, const char* eval_config_json,
                             char** report_json);

// lambdas: "start:stop:step" or "a,b,c". *report_json is a sweep report.
HM_API hm_status hm_sweep(const hm_model* base, const hm_corpus* train_corpus, const hm_corpus* const* datasets,
                          const char* const* dataset_names, size_t dataset_count, const hm_vocab* vocab,
                          const char* lambdas, const char* train_config_json, const char* eval_config_json,
                          char** report_json);

// Renders an evaluation or sweep report as "table", "json" or "csv".
HM_API hm_status hm_report_render(const char* report_json, const char* format, char** out);
// Curves of a sweep report as "csv" or "svg".
HM_API hm_status hm_report_curves(const char* report_json, const char* format, char** out);

// Mean over sentences of the summed squared hidden-state distance at layer
// (SIZE_MAX for the final layer).
HM_API hm_status hm_representation_stray(const hm_model* current, const hm_model* base, const hm_corpus* corpus,
                                         const hm_vocab* vocab, size_t layer, double* out);

#ifdef __cplusplus
}
#endif

#endif  // HANMLM_HANMLM_H_
