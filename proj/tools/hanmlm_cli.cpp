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

// Command-line front end. Everything goes through the C API.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hanmlm/hanmlm.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(message), stage(std::move(stage)) {}
  std::string stage;
};

void check(hm_status status, const std::string& stage) {
  if (status != HM_OK) throw StageError(stage, hm_last_error());
}

struct CString {
  char* p = nullptr;
  ~CString() { hm_free_string(p); }
  char** out() { return &p; }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

template <typename T, void (*Free)(T*)>
struct Freer {
  void operator()(T* p) const { Free(p); }
};
using Corpus = std::unique_ptr<hm_corpus, Freer<hm_corpus, hm_corpus_free>>;
using Vocab = std::unique_ptr<hm_vocab, Freer<hm_vocab, hm_vocab_free>>;
using Model = std::unique_ptr<hm_model, Freer<hm_model, hm_model_free>>;
using Map = std::unique_ptr<hm_syllable_map, Freer<hm_syllable_map, hm_syllable_map_free>>;

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << v;
  return s.str();
}

// Per-invocation record written as the manifest.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  json config = json::object();
  json inputs = json::array();
  json outputs = json::array();
  fs::path manifest;

  void input(const fs::path& path) {
    json j{{"path", path.string()}};
    if (fs::is_regular_file(path)) {
      j["bytes"] = fs::file_size(path);
      j["fnv1a64"] = hex(file_hash(path));
    }
    inputs.push_back(std::move(j));
  }
  void output(const fs::path& path) {
    json j{{"path", path.string()}};
    if (fs::is_regular_file(path)) {
      j["bytes"] = fs::file_size(path);
      j["fnv1a64"] = hex(file_hash(path));
    }
    outputs.push_back(std::move(j));
  }
};

fs::path output_root() {
  const char* root = std::getenv("HANMLM_OUT");
  return root && *root ? fs::path(root) : fs::path();
}

// Relative output paths land under $HANMLM_OUT when it is set.
fs::path out_path(const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !output_root().empty()) path = output_root() / path;
  return path;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text, Run& run, const std::string& stage) {
  try {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
  run.output(path);
}

std::string read_text(const fs::path& path, const std::string& stage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError(stage, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path default_manifest(const std::string& command) {
  const fs::path root = output_root();
  return (root.empty() ? fs::path(".") : root) / (command + ".manifest.json");
}

fs::path file_manifest(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

void write_manifest(const Run& run, int exit_code, const std::optional<StageError>& error) {
  if (run.manifest.empty()) return;
  json j;
  j["tool"] = "hanmlm";
  j["version"] = hm_version();
  j["command"] = run.command;
  j["argv"] = run.argv;
  j["config"] = run.config;
  j["inputs"] = run.inputs;
  j["outputs"] = run.outputs;
  j["exit_code"] = exit_code;
  j["error"] = error ? json{{"stage", error->stage}, {"message", error->what()}} : json(nullptr);
  try {
    ensure_parent(run.manifest);
    std::ofstream out(run.manifest, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "hanmlm: warning: cannot write manifest " << run.manifest << ": " << e.what() << '\n';
  }
}

void print_issues(const std::string& report, const std::string& what) {
  const json j = json::parse(report);
  for (const auto& issue : j.at("issues")) {
    std::cerr << "warning: " << what << " line " << issue.at("line").get<std::size_t>() << ": "
              << issue.at("message").get<std::string>() << '\n';
  }
}

// --config file: {"model": {...}, "train": {...}, "eval": {...}}.
json load_config(const std::string& path, Run& run) {
  if (path.empty()) return json::object();
  run.input(path);
  json j;
  try {
    j = json::parse(read_text(path, "read config"));
  } catch (const json::exception& e) {
    throw StageError("read config", path + ": " + e.what());
  }
  if (!j.is_object()) throw StageError("read config", path + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "model" && key != "train" && key != "eval") {
      throw StageError("read config", path + ": unknown section '" + key + "'");
    }
    if (!value.is_object()) throw StageError("read config", path + ": section '" + key + "' must be an object");
  }
  return j;
}

json section(const json& config, const char* name) {
  return config.contains(name) ? config.at(name) : json::object();
}

template <typename T>
void overlay(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

json resolve(const char* kind, const json& partial) {
  CString out;
  check(hm_resolve_config(kind, partial.dump().c_str(), out.out()), std::string("resolve ") + kind + " config");
  return json::parse(out.str());
}

Corpus load_corpus(const std::string& path, Run& run) {
  run.input(path);
  hm_corpus* c = nullptr;
  CString report;
  check(hm_corpus_load_jsonl(path.c_str(), &c, report.out()), "load corpus " + path);
  print_issues(report.str(), path);
  return Corpus(c);
}

Corpus load_corpora(const std::vector<std::string>& paths, Run& run) {
  Corpus joined = load_corpus(paths.at(0), run);
  for (std::size_t i = 1; i < paths.size(); ++i) {
    Corpus next = load_corpus(paths[i], run);
    hm_corpus* c = nullptr;
    check(hm_corpus_concat(joined.get(), next.get(), &c), "join corpora");
    joined.reset(c);
  }
  return joined;
}

Vocab load_vocab(const std::string& path, Run& run) {
  run.input(path);
  hm_vocab* v = nullptr;
  check(hm_vocab_load(path.c_str(), &v), "load vocabulary");
  return Vocab(v);
}

Model load_model(const std::string& path, Run& run) {
  run.input(path);
  hm_model* m = nullptr;
  check(hm_model_load(path.c_str(), &m), "load checkpoint");
  return Model(m);
}

std::pair<std::string, std::string> split_named(const std::string& arg, const char* what) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) return {fs::path(arg).stem().string(), arg};
  if (eq == 0 || eq + 1 == arg.size()) throw StageError("arguments", std::string("bad ") + what + " '" + arg + "'");
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

struct Datasets {
  std::vector<Corpus> corpora;
  std::vector<std::string> names;
  std::vector<const hm_corpus*> handles() const {
    std::vector<const hm_corpus*> out;
    for (const auto& c : corpora) out.push_back(c.get());
    return out;
  }
  std::vector<const char*> name_ptrs() const {
    std::vector<const char*> out;
    for (const auto& n : names) out.push_back(n.c_str());
    return out;
  }
};

Datasets load_datasets(const std::vector<std::string>& specs, Run& run) {
  Datasets d;
  for (const auto& arg : specs) {
    auto [name, path] = split_named(arg, "dataset");
    d.corpora.push_back(load_corpus(path, run));
    d.names.push_back(name);
  }
  return d;
}

// Flags shared by train and sweep.
struct TrainFlags {
  std::string config;
  std::optional<double> lambda, lr, mask_prob, warmup;
  std::optional<std::size_t> epochs, batch_size, log_interval, checkpoint_every;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> masking, layer, schedule;
  bool timestamps = false;

  void add(CLI::App* app, bool with_lambda) {
    app->add_option("--config", config, "JSON config with model/train/eval sections")->check(CLI::ExistingFile);
    if (with_lambda) app->add_option("--lambda", lambda, "weight of the cross-lingual penalty");
    app->add_option("--epochs", epochs);
    app->add_option("--lr", lr, "peak learning rate");
    app->add_option("--batch-size", batch_size);
    app->add_option("--seed", seed, "training seed");
    app->add_option("--mask-prob", mask_prob);
    app->add_option("--warmup", warmup, "warmup fraction of all steps");
    app->add_option("--schedule", schedule)->check(CLI::IsMember({"warmup-linear-decay", "warmup-constant"}));
    app->add_option("--masking", masking)->check(CLI::IsMember({"mask-only", "bert-80-10-10"}));
    app->add_option("--layer", layer, "penalty layer: 0..L or 'final'");
    app->add_option("--log-interval", log_interval);
    app->add_option("--checkpoint-every", checkpoint_every, "epochs between checkpoints, 0 = final only");
    app->add_flag("--timestamps", timestamps, "record wall-clock seconds in the training log");
  }

  json apply(json j) const {
    overlay(j, "lambda", lambda);
    overlay(j, "learning_rate", lr);
    overlay(j, "mask_probability", mask_prob);
    overlay(j, "warmup_fraction", warmup);
    overlay(j, "epochs", epochs);
    overlay(j, "batch_size", batch_size);
    overlay(j, "log_interval", log_interval);
    overlay(j, "checkpoint_every", checkpoint_every);
    overlay(j, "seed", seed);
    overlay(j, "masking", masking);
    overlay(j, "schedule", schedule);
    if (layer) {
      if (*layer == "final") j["representation_layer"] = "final";
      else {
        try {
          j["representation_layer"] = std::stoull(*layer);
        } catch (const std::exception&) {
          throw StageError("arguments", "--layer must be a number or 'final'");
        }
      }
    }
    if (timestamps) j["log_timestamps"] = true;
    return j;
  }
};

struct EvalFlags {
  std::optional<std::size_t> repeats;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<double> mask_prob;
  std::optional<std::string> normalization;

  void add(CLI::App* app, const char* mask_flag) {
    app->add_option("--repeats", repeats, "masking repeats per dataset");
    app->add_option("--eval-seeds", seeds, "one masking seed per repeat")->delimiter(',');
    app->add_option(mask_flag, mask_prob, "evaluation mask probability");
    app->add_option("--normalization", normalization)->check(CLI::IsMember({"per-token", "per-sentence"}));
  }

  json apply(json j) const {
    overlay(j, "repeats", repeats);
    overlay(j, "mask_probability", mask_prob);
    overlay(j, "normalization", normalization);
    if (seeds) j["seeds"] = *seeds;
    if (repeats && !seeds && j.contains("seeds") && j["seeds"].size() != *repeats) j.erase("seeds");
    return j;
  }
};

struct ModelFlags {
  std::optional<std::size_t> hidden, layers, heads, intermediate, max_position;
  std::optional<double> dropout;

  void add(CLI::App* app) {
    app->add_option("--hidden", hidden, "hidden size for --init");
    app->add_option("--layers", layers, "encoder layers for --init");
    app->add_option("--heads", heads, "attention heads for --init");
    app->add_option("--intermediate", intermediate, "feed-forward size for --init");
    app->add_option("--max-position", max_position, "longest sequence for --init");
    app->add_option("--dropout", dropout, "dropout for --init");
  }

  json apply(json j) const {
    overlay(j, "hidden_size", hidden);
    overlay(j, "num_layers", layers);
    overlay(j, "num_heads", heads);
    overlay(j, "intermediate_size", intermediate);
    overlay(j, "max_position", max_position);
    overlay(j, "dropout_prob", dropout);
    return j;
  }
};

struct Options {
  // shared
  std::string input, out, vocab, text, format, map_file, corpus_path;
  std::vector<std::string> corpora, models, datasets;

  // synth
  std::string language;
  std::size_t documents = 100, per_document = 10;
  std::uint64_t synth_seed = 1;

  // ingest
  std::string ingest_format = "auto", rules, test_out;
  bool map_syllables = false;
  std::optional<double> train_fraction;
  std::uint64_t split_seed = 0;

  // build-vocab
  std::size_t size = 2000, min_frequency = 1;

  // find-novel
  std::size_t top = 0;

  // train
  std::string base;
  bool init = false;
  std::uint64_t init_seed = 1;
  TrainFlags train;
  ModelFlags model;
  EvalFlags eval;
  std::string eval_config;

  // sweep
  std::string lambdas = "0.1:1:0.1";
  bool no_curves = false;

  // report
  std::string curves;

  // stray
  std::string layer = "final";
};

void cmd_synth(const Options& o, Run& run) {
  const fs::path out = out_path(o.out);
  run.manifest = file_manifest(out);
  run.config = {{"language", o.language}, {"documents", o.documents}, {"per_document", o.per_document},
                {"seed", o.synth_seed}};
  hm_corpus* c = nullptr;
  check(hm_corpus_synthetic(o.language.c_str(), o.documents, o.per_document, o.synth_seed, &c), "generate");
  Corpus corpus(c);
  ensure_parent(out);
  check(hm_corpus_save_jsonl(corpus.get(), out.string().c_str()), "write corpus");
  run.output(out);
  std::cout << "wrote " << hm_corpus_sentence_count(corpus.get()) << " sentences to " << out.string() << '\n';
}

void cmd_ingest(const Options& o, Run& run) {
  const fs::path out = out_path(o.out);
  run.manifest = file_manifest(out);
  std::string format = o.ingest_format;
  if (format == "auto") {
    if (fs::is_directory(o.input)) format = "html";
    else if (fs::path(o.input).extension() == ".tsv") format = "nli";
    else format = "jsonl";
  }
  run.config = {{"format", format}, {"map_syllables", o.map_syllables || !o.map_file.empty()}};
  if (o.train_fraction) run.config["train_fraction"] = *o.train_fraction, run.config["split_seed"] = o.split_seed;

  hm_corpus* c = nullptr;
  CString report;
  if (format == "html") {
    std::string rules;
    if (!o.rules.empty()) {
      run.input(o.rules);
      rules = read_text(o.rules, "read extraction rules");
    }
    run.input(o.input);
    check(hm_corpus_from_html_dir(o.input.c_str(), rules.empty() ? nullptr : rules.c_str(), &c, report.out()),
          "ingest html");
  } else if (format == "nli") {
    run.input(o.input);
    check(hm_corpus_from_nli_tsv(o.input.c_str(), &c, report.out()), "ingest nli");
  } else {
    run.input(o.input);
    check(hm_corpus_load_jsonl(o.input.c_str(), &c, report.out()), "ingest jsonl");
  }
  Corpus corpus(c);
  print_issues(report.str(), o.input);

  if (o.map_syllables || !o.map_file.empty()) {
    if (!o.map_file.empty()) run.input(o.map_file);
    hm_syllable_map* m = nullptr;
    check(hm_syllable_map_load(o.map_file.empty() ? nullptr : o.map_file.c_str(), &m), "load syllable map");
    Map map(m);
    check(hm_corpus_apply_map(corpus.get(), map.get(), &c), "map syllables");
    corpus.reset(c);
  }

  if (o.train_fraction) {
    if (o.test_out.empty()) throw StageError("arguments", "--train-fraction needs --test-out");
    hm_corpus *train = nullptr, *test = nullptr;
    check(hm_corpus_split(corpus.get(), *o.train_fraction, o.split_seed, &train, &test), "split");
    Corpus tr(train), te(test);
    const fs::path test_out = out_path(o.test_out);
    ensure_parent(out);
    ensure_parent(test_out);
    check(hm_corpus_save_jsonl(tr.get(), out.string().c_str()), "write corpus");
    check(hm_corpus_save_jsonl(te.get(), test_out.string().c_str()), "write corpus");
    run.output(out);
    run.output(test_out);
    std::cout << "train: " << hm_corpus_document_count(tr.get()) << " documents, test: "
              << hm_corpus_document_count(te.get()) << " documents\n";
    return;
  }
  ensure_parent(out);
  check(hm_corpus_save_jsonl(corpus.get(), out.string().c_str()), "write corpus");
  run.output(out);
  std::cout << hm_corpus_document_count(corpus.get()) << " documents, " << hm_corpus_sentence_count(corpus.get())
            << " sentences\n";
}

void cmd_map(const Options& o, Run& run) {
  run.manifest = o.out.empty() ? default_manifest("map-syllables") : file_manifest(out_path(o.out));
  run.config = {{"map", o.map_file.empty() ? json("builtin") : json(o.map_file)}};
  if (!o.map_file.empty()) run.input(o.map_file);
  hm_syllable_map* m = nullptr;
  check(hm_syllable_map_load(o.map_file.empty() ? nullptr : o.map_file.c_str(), &m), "load syllable map");
  Map map(m);
  if (!o.text.empty()) {
    CString mapped;
    check(hm_syllable_map_apply(map.get(), o.text.c_str(), mapped.out()), "map syllables");
    std::cout << mapped.str() << '\n';
    return;
  }
  if (o.input.empty() || o.out.empty()) throw StageError("arguments", "need --text, or --input and --out");
  Corpus corpus = load_corpus(o.input, run);
  hm_corpus* c = nullptr;
  check(hm_corpus_apply_map(corpus.get(), map.get(), &c), "map syllables");
  Corpus mapped(c);
  const fs::path out = out_path(o.out);
  ensure_parent(out);
  check(hm_corpus_save_jsonl(mapped.get(), out.string().c_str()), "write corpus");
  run.output(out);
}

void cmd_find_novel(const Options& o, Run& run) {
  run.manifest = o.out.empty() ? default_manifest("find-novel") : file_manifest(out_path(o.out));
  run.config = {{"top", o.top}, {"format", o.format}};
  Corpus corpus = load_corpus(o.corpus_path, run);
  Vocab vocab = load_vocab(o.vocab, run);
  CString found;
  check(hm_find_novel(corpus.get(), vocab.get(), found.out()), "find novel syllables");
  json list = json::parse(found.str());
  if (o.top > 0 && list.size() > o.top) list.erase(list.begin() + static_cast<std::ptrdiff_t>(o.top), list.end());
  std::string text;
  if (o.format == "json") {
    text = list.dump(2) + "\n";
  } else {
    text = "syllable\tcodepoint\tcount\n";
    for (const auto& e : list) {
      std::ostringstream cp;
      cp << "U+" << std::uppercase << std::hex << e.at("codepoint").get<std::uint32_t>();
      text += e.at("syllable").get<std::string>() + "\t" + cp.str() + "\t" +
              std::to_string(e.at("count").get<std::size_t>()) + "\n";
    }
  }
  if (o.out.empty()) std::cout << text;
  else write_text(out_path(o.out), text, run, "write novel syllables");
}

void cmd_build_vocab(const Options& o, Run& run) {
  const fs::path out = out_path(o.out);
  run.manifest = file_manifest(out);
  run.config = {{"target_size", o.size}, {"min_frequency", o.min_frequency}};
  Corpus corpus = load_corpora(o.corpora, run);
  hm_vocab* v = nullptr;
  check(hm_vocab_build(corpus.get(), o.size, o.min_frequency, &v), "build vocabulary");
  Vocab vocab(v);
  ensure_parent(out);
  check(hm_vocab_save(vocab.get(), out.string().c_str()), "write vocabulary");
  run.output(out);
  std::cout << "vocabulary: " << hm_vocab_size(vocab.get()) << " tokens\n";
}

void cmd_tokenize(const Options& o, Run& run) {
  run.manifest = o.out.empty() ? default_manifest("tokenize") : file_manifest(out_path(o.out));
  run.config = {{"format", o.format}};
  Vocab vocab = load_vocab(o.vocab, run);
  std::vector<std::string> lines;
  if (!o.text.empty()) {
    lines.push_back(o.text);
  } else if (!o.input.empty()) {
    run.input(o.input);
    std::istringstream in(read_text(o.input, "read input"));
    for (std::string line; std::getline(in, line);) lines.push_back(line);
  } else {
    throw StageError("arguments", "need --text or --input");
  }
  std::string text;
  json all = json::array();
  for (const auto& line : lines) {
    CString result;
    check(hm_tokenize(vocab.get(), line.c_str(), result.out()), "tokenize");
    json j = json::parse(result.str());
    if (o.format == "json") {
      all.push_back(std::move(j));
      continue;
    }
    std::string joined;
    for (const auto& t : j.at("tokens")) joined += (joined.empty() ? "" : " ") + t.get<std::string>();
    text += joined + "\n";
  }
  if (o.format == "json") text = all.dump(2) + "\n";
  if (o.out.empty()) std::cout << text;
  else write_text(out_path(o.out), text, run, "write tokens");
}

void cmd_train(const Options& o, Run& run) {
  const fs::path dir = out_path(o.out);
  run.manifest = dir / "manifest.json";
  const json file = load_config(o.train.config, run);
  const json train_config = resolve("train", o.train.apply(section(file, "train")));
  run.config["train"] = train_config;

  Vocab vocab = load_vocab(o.vocab, run);
  Model base;
  if (o.init) {
    json model_config = o.model.apply(section(file, "model"));
    model_config["vocab_size"] = hm_vocab_size(vocab.get());
    model_config = resolve("model", model_config);
    run.config["model"] = model_config;
    run.config["init_seed"] = o.init_seed;
    hm_model* m = nullptr;
    check(hm_model_init(model_config.dump().c_str(), vocab.get(), o.init_seed, &m), "initialize model");
    base.reset(m);
  } else {
    base = load_model(o.base, run);
    CString mc;
    check(hm_model_config(base.get(), mc.out()), "read model config");
    run.config["model"] = json::parse(mc.str());
  }
  Corpus corpus = load_corpora(o.corpora, run);

  fs::create_directories(dir);
  hm_model* t = nullptr;
  CString log;
  check(hm_train(base.get(), corpus.get(), vocab.get(), train_config.dump().c_str(), dir.string().c_str(), &t,
                 log.out()),
        "train");
  Model trained(t);
  for (const char* name : {"train_log.jsonl", "model.ckpt"}) run.output(dir / name);
  const std::string text = log.str();
  const auto last_line = text.rfind('\n', text.size() >= 2 ? text.size() - 2 : 0);
  const std::string last = text.substr(last_line == std::string::npos ? 0 : last_line + 1);
  if (!last.empty()) {
    const json r = json::parse(last);
    std::cout << "step " << r.at("step") << " mlm " << r.at("mlm_loss") << " penalty " << r.at("penalty")
              << " cross-lingual L2 " << r.at("cross_lingual_l2") << '\n';
  }
  std::cout << "checkpoint: " << (dir / "model.ckpt").string() << '\n';
}

std::vector<Model> load_models(const std::vector<std::string>& specs, std::vector<std::string>& names, Run& run) {
  std::vector<Model> out;
  for (const auto& arg : specs) {
    auto [name, path] = split_named(arg, "model");
    out.push_back(load_model(path, run));
    names.push_back(name);
  }
  return out;
}

void cmd_evaluate(const Options& o, Run& run) {
  const fs::path out = out_path(o.out);
  run.manifest = file_manifest(out);
  const json file = load_config(o.eval_config, run);
  const json eval_config = resolve("eval", o.eval.apply(section(file, "eval")));
  run.config["eval"] = eval_config;

  Vocab vocab = load_vocab(o.vocab, run);
  std::vector<std::string> names;
  std::vector<Model> models = load_models(o.models, names, run);
  const Datasets data = load_datasets(o.datasets, run);

  std::vector<const hm_model*> handles;
  std::vector<const char*> name_ptrs;
  for (std::size_t i = 0; i < models.size(); ++i) {
    handles.push_back(models[i].get());
    name_ptrs.push_back(names[i].c_str());
  }
  const auto corpora = data.handles();
  const auto dataset_names = data.name_ptrs();
  CString report;
  check(hm_evaluate(handles.data(), name_ptrs.data(), handles.size(), corpora.data(), dataset_names.data(),
                    corpora.size(), vocab.get(), eval_config.dump().c_str(), report.out()),
        "evaluate");
  write_text(out, report.str(), run, "write report");
  CString rendered;
  check(hm_report_render(report.str().c_str(), o.format.c_str(), rendered.out()), "render report");
  std::cout << rendered.str();
}

void cmd_sweep(const Options& o, Run& run) {
  const fs::path dir = out_path(o.out);
  run.manifest = dir / "manifest.json";
  const json file = load_config(o.train.config, run);
  const json train_config = resolve("train", o.train.apply(section(file, "train")));
  const json eval_config = resolve("eval", o.eval.apply(section(file, "eval")));
  run.config = {{"lambdas", o.lambdas}, {"train", train_config}, {"eval", eval_config}};

  Vocab vocab = load_vocab(o.vocab, run);
  Model base = load_model(o.base, run);
  Corpus train = load_corpora(o.corpora, run);
  const Datasets data = load_datasets(o.datasets, run);
  const auto corpora = data.handles();
  const auto names = data.name_ptrs();
  CString report;
  check(hm_sweep(base.get(), train.get(), corpora.data(), names.data(), corpora.size(), vocab.get(),
                 o.lambdas.c_str(), train_config.dump().c_str(), eval_config.dump().c_str(), report.out()),
        "sweep");
  write_text(dir / "sweep.json", report.str(), run, "write report");
  for (const auto& [format, name] : {std::pair{"table", "sweep.txt"}, std::pair{"csv", "sweep.csv"}}) {
    CString r;
    check(hm_report_render(report.str().c_str(), format, r.out()), "render report");
    write_text(dir / name, r.str(), run, "write report");
    if (std::string(format) == "table") std::cout << r.str();
  }
  if (!o.no_curves) {
    for (const auto& [format, name] : {std::pair{"csv", "curves.csv"}, std::pair{"svg", "curves.svg"}}) {
      CString r;
      check(hm_report_curves(report.str().c_str(), format, r.out()), "render curves");
      write_text(dir / name, r.str(), run, "write curves");
    }
  }
}

void cmd_report(const Options& o, Run& run) {
  run.manifest = o.out.empty() ? default_manifest("report") : file_manifest(out_path(o.out));
  run.config = {{"format", o.format}};
  if (!o.curves.empty()) run.config["curves"] = o.curves;
  run.input(o.input);
  const std::string report = read_text(o.input, "read report");
  CString rendered;
  if (o.curves.empty()) check(hm_report_render(report.c_str(), o.format.c_str(), rendered.out()), "render report");
  else check(hm_report_curves(report.c_str(), o.curves.c_str(), rendered.out()), "render curves");
  if (o.out.empty()) std::cout << rendered.str();
  else write_text(out_path(o.out), rendered.str(), run, "write report");
}

void cmd_stray(const Options& o, Run& run) {
  run.manifest = o.out.empty() ? default_manifest("stray") : file_manifest(out_path(o.out));
  run.config = {{"layer", o.layer}};
  std::size_t layer = SIZE_MAX;
  if (o.layer != "final") {
    try {
      layer = std::stoull(o.layer);
    } catch (const std::exception&) {
      throw StageError("arguments", "--layer must be a number or 'final'");
    }
  }
  Vocab vocab = load_vocab(o.vocab, run);
  std::vector<std::string> names;
  auto models = load_models(o.models, names, run);
  Model base = load_model(o.base, run);
  Corpus corpus = load_corpus(o.corpus_path, run);
  json out = json::object();
  for (std::size_t i = 0; i < models.size(); ++i) {
    double value = 0.0;
    check(hm_representation_stray(models[i].get(), base.get(), corpus.get(), vocab.get(), layer, &value),
          "measure stray");
    out[names[i]] = value;
    std::cout << names[i] << '\t' << value << '\n';
  }
  if (!o.out.empty()) write_text(out_path(o.out), out.dump(2) + "\n", run, "write stray");
}

int run_cli(const std::vector<std::string>& args);

int cmd_rerun(const std::string& manifest) {
  json j;
  try {
    j = json::parse(read_text(manifest, "read manifest"));
    return run_cli(j.at("argv").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    std::cerr << "hanmlm rerun: read manifest: " << manifest << ": " << e.what() << '\n';
    return 2;
  } catch (const StageError& e) {
    std::cerr << "hanmlm rerun: " << e.stage << ": " << e.what() << '\n';
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Korean masked-language-model toolkit: corpora, WordPiece, training and evaluation", "hanmlm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hm_version()));
  Options o;

  auto* synth = app.add_subcommand("synth", "generate a synthetic language corpus");
  synth->add_option("--language", o.language, "A or B")->required()->check(CLI::IsMember({"A", "B", "a", "b"}));
  synth->add_option("--documents", o.documents)->check(CLI::PositiveNumber);
  synth->add_option("--per-document", o.per_document, "sentences per document")->check(CLI::PositiveNumber);
  synth->add_option("--seed", o.synth_seed);
  synth->add_option("--out", o.out, "JSONL corpus")->required();

  auto* ingest = app.add_subcommand("ingest", "build a JSONL corpus from JSONL, HTML pages or an NLI TSV");
  ingest->add_option("--input", o.input, "file or directory")->required()->check(CLI::ExistingPath);
  ingest->add_option("--format", o.ingest_format)->check(CLI::IsMember({"auto", "jsonl", "html", "nli"}));
  ingest->add_option("--rules", o.rules, "HTML extraction rules (JSON)")->check(CLI::ExistingFile);
  ingest->add_flag("--map-syllables", o.map_syllables, "apply the builtin syllable map");
  ingest->add_option("--map", o.map_file, "apply this syllable map (TSV)")->check(CLI::ExistingFile);
  ingest->add_option("--train-fraction", o.train_fraction, "split documents; --out receives the train part");
  ingest->add_option("--test-out", o.test_out);
  ingest->add_option("--split-seed", o.split_seed);
  ingest->add_option("--out", o.out)->required();

  auto* map = app.add_subcommand("map-syllables", "rewrite syllables with a syllable map");
  map->add_option("--map", o.map_file, "TSV map; the builtin map if omitted")->check(CLI::ExistingFile);
  map->add_option("--text", o.text);
  map->add_option("--input", o.input, "JSONL corpus")->check(CLI::ExistingFile);
  map->add_option("--out", o.out);

  auto* novel = app.add_subcommand("find-novel", "list syllables the vocabulary cannot spell");
  novel->add_option("--corpus", o.corpus_path)->required()->check(CLI::ExistingFile);
  novel->add_option("--vocab", o.vocab)->required()->check(CLI::ExistingFile);
  novel->add_option("--top", o.top, "0 = all");
  novel->add_option("--format", o.format)->check(CLI::IsMember({"table", "json"}))->default_val("table");
  novel->add_option("--out", o.out);

  auto* vocab = app.add_subcommand("build-vocab", "learn a WordPiece vocabulary");
  vocab->add_option("--corpus", o.corpora, "JSONL corpora")->required()->check(CLI::ExistingFile);
  vocab->add_option("--size", o.size, "target vocabulary size");
  vocab->add_option("--min-frequency", o.min_frequency);
  vocab->add_option("--out", o.out)->required();

  auto* tok = app.add_subcommand("tokenize", "WordPiece-tokenize text");
  tok->add_option("--vocab", o.vocab)->required()->check(CLI::ExistingFile);
  tok->add_option("--text", o.text);
  tok->add_option("--input", o.input, "one sentence per line")->check(CLI::ExistingFile);
  tok->add_option("--format", o.format)->check(CLI::IsMember({"text", "json"}))->default_val("text");
  tok->add_option("--out", o.out);

  auto* train = app.add_subcommand("train", "continue masked-LM pretraining");
  train->add_option("--corpus", o.corpora, "JSONL corpora")->required()->check(CLI::ExistingFile);
  train->add_option("--vocab", o.vocab)->required()->check(CLI::ExistingFile);
  auto* base_opt = train->add_option("--base", o.base, "starting checkpoint");
  auto* init_opt = train->add_flag("--init", o.init, "start from a freshly initialized model");
  base_opt->excludes(init_opt);
  train->add_option("--init-seed", o.init_seed);
  o.train.add(train, true);
  o.model.add(train);
  train->add_option("--out", o.out, "output directory")->required();
  train->callback([&] {
    if (o.base.empty() && !o.init) throw CLI::ValidationError("train", "need --base or --init");
  });

  auto* eval = app.add_subcommand("evaluate", "score models by masked-LM perplexity and accuracy");
  eval->add_option("--model", o.models, "NAME=CHECKPOINT")->required();
  eval->add_option("--dataset", o.datasets, "NAME=CORPUS.jsonl")->required();
  eval->add_option("--vocab", o.vocab)->required()->check(CLI::ExistingFile);
  eval->add_option("--config", o.eval_config, "JSON config with an eval section")->check(CLI::ExistingFile);
  o.eval.add(eval, "--mask-prob");
  eval->add_option("--format", o.format, "stdout rendering")
      ->check(CLI::IsMember({"table", "json", "csv"}))
      ->default_val("table");
  eval->add_option("--out", o.out, "report JSON")->required();

  auto* sweep = app.add_subcommand("sweep", "train and score one model per lambda");
  sweep->add_option("--base", o.base)->required();
  sweep->add_option("--train", o.corpora, "JSONL corpora to train on")->required()->check(CLI::ExistingFile);
  sweep->add_option("--dataset", o.datasets, "NAME=CORPUS.jsonl")->required();
  sweep->add_option("--vocab", o.vocab)->required()->check(CLI::ExistingFile);
  sweep->add_option("--lambdas", o.lambdas, "start:stop:step or a,b,c");
  o.train.add(sweep, false);
  o.eval.add(sweep, "--eval-mask-prob");
  sweep->add_flag("--no-curves", o.no_curves, "skip per-epoch dataset scores");
  sweep->add_option("--out", o.out, "output directory")->required();

  auto* report = app.add_subcommand("report", "render an evaluation or sweep report");
  report->add_option("--input", o.input, "report JSON")->required()->check(CLI::ExistingFile);
  report->add_option("--format", o.format)->check(CLI::IsMember({"table", "json", "csv"}))->default_val("table");
  report->add_option("--curves", o.curves, "render sweep curves instead")->check(CLI::IsMember({"csv", "svg"}));
  report->add_option("--out", o.out);

  auto* stray = app.add_subcommand("stray", "hidden-state distance of models from a base model");
  stray->add_option("--model", o.models, "NAME=CHECKPOINT")->required();
  stray->add_option("--base", o.base)->required();
  stray->add_option("--corpus", o.corpus_path)->required()->check(CLI::ExistingFile);
  stray->add_option("--vocab", o.vocab)->required()->check(CLI::ExistingFile);
  stray->add_option("--layer", o.layer, "0..L or 'final'");
  stray->add_option("--out", o.out);

  std::string manifest;
  auto* rerun = app.add_subcommand("rerun", "repeat the command recorded in a manifest");
  rerun->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "hanmlm: " << e.what() << "\n\n";
    const auto chosen = app.get_subcommands();
    std::cerr << (chosen.empty() ? app.help() : chosen.front()->help());
    return 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen == rerun) return cmd_rerun(manifest);

  Run run;
  run.command = chosen->get_name();
  run.argv = args;
  std::optional<StageError> error;
  try {
    if (chosen == synth) cmd_synth(o, run);
    else if (chosen == ingest) cmd_ingest(o, run);
    else if (chosen == map) cmd_map(o, run);
    else if (chosen == novel) cmd_find_novel(o, run);
    else if (chosen == vocab) cmd_build_vocab(o, run);
    else if (chosen == tok) cmd_tokenize(o, run);
    else if (chosen == train) cmd_train(o, run);
    else if (chosen == eval) cmd_evaluate(o, run);
    else if (chosen == sweep) cmd_sweep(o, run);
    else if (chosen == report) cmd_report(o, run);
    else if (chosen == stray) cmd_stray(o, run);
  } catch (const StageError& e) {
    error = e;
  } catch (const json::exception& e) {
    error = StageError("parse", e.what());
  } catch (const std::exception& e) {
    error = StageError(run.command, e.what());
  }
  if (run.manifest.empty()) run.manifest = default_manifest(run.command);
  if (error) {
    std::cerr << "hanmlm " << run.command << ": " << error->stage << ": " << error->what() << '\n';
    write_manifest(run, 2, error);
    return 2;
  }
  write_manifest(run, 0, std::nullopt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(std::vector<std::string>(argv + 1, argv + argc)); }
