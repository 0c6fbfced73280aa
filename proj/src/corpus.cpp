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

#include "hanmlm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hanmlm/error.hpp"
#include "hanmlm/hangul.hpp"
#include "hanmlm/rng.hpp"
#include "hanmlm/utf8.hpp"

namespace hanmlm {

using json = nlohmann::ordered_json;

std::string_view to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::kRodong: return "rodong";
    case SourceTag::kNewYear: return "newyear";
    case SourceTag::kNli: return "nli";
    case SourceTag::kOther: return "other";
  }
  return "other";
}

std::optional<SourceTag> parse_source_tag(std::string_view text) {
  if (text == "rodong") return SourceTag::kRodong;
  if (text == "newyear") return SourceTag::kNewYear;
  if (text == "nli") return SourceTag::kNli;
  if (text == "other") return SourceTag::kOther;
  return std::nullopt;
}

std::string_view to_string(NliSplit split) {
  switch (split) {
    case NliSplit::kTrain: return "train";
    case NliSplit::kDev: return "dev";
    case NliSplit::kTest: return "test";
  }
  return "test";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Corpus::Corpus(std::vector<Document> documents) {
  for (auto& d : documents) add(std::move(d));
}

void Corpus::add(Document doc) {
  if (doc.id.empty()) throw InvalidArgument("document id is empty");
  if (ids_.contains(doc.id)) throw InvalidArgument("duplicate document id " + doc.id);
  for (const auto& s : doc.sentences) {
    if (s.empty()) throw InvalidArgument("document " + doc.id + " has an empty sentence");
  }
  ids_.insert(doc.id);
  sentence_count_ += doc.sentences.size();
  documents_.push_back(std::move(doc));
}

std::vector<std::string> Corpus::all_sentences() const {
  std::vector<std::string> out;
  out.reserve(sentence_count_);
  for (const auto& d : documents_) out.insert(out.end(), d.sentences.begin(), d.sentences.end());
  return out;
}

std::string IngestReport::summary() const {
  std::string out = std::to_string(issues.size()) + " malformed line(s)";
  for (const auto& i : issues) out += "\n  line " + std::to_string(i.line) + ": " + i.message;
  return out;
}

namespace {

std::string required_string(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(std::string("field '") + key + "' missing or not a string");
  }
  return it->get<std::string>();
}

bool is_iso_day(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

Document document_from_json(const json& obj) {
  if (!obj.is_object()) throw ParseError("not a JSON object");
  Document doc;
  doc.id = required_string(obj, "id");
  if (doc.id.empty()) throw ParseError("empty id");
  if (const auto it = obj.find("date"); it != obj.end() && !it->is_null()) {
    if (!it->is_string() || !is_iso_day(it->get<std::string>())) {
      throw ParseError("date must be YYYY-MM-DD or null");
    }
    doc.date = it->get<std::string>();
  }
  doc.title = hangul::normalize(required_string(obj, "title"));
  const auto sentences = obj.find("sentences");
  if (sentences == obj.end() || !sentences->is_array()) {
    throw ParseError("field 'sentences' missing or not an array");
  }
  for (const auto& s : *sentences) {
    if (!s.is_string() || s.get<std::string>().empty()) {
      throw ParseError("sentences must be non-empty strings");
    }
    doc.sentences.push_back(hangul::normalize(s.get<std::string>()));
  }
  const auto tag = parse_source_tag(required_string(obj, "source_tag"));
  if (!tag) throw ParseError("unknown source_tag");
  doc.source_tag = *tag;
  return doc;
}

}  // namespace

Corpus parse_jsonl(std::string_view text, IngestReport& report) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      if (auto bad = utf8::first_invalid(line)) {
        throw ParseError("invalid UTF-8 at byte " + std::to_string(*bad));
      }
      Document doc = document_from_json(json::parse(line));
      if (!seen.insert(doc.id).second) throw ParseError("duplicate id " + doc.id);
      corpus.add(std::move(doc));
    } catch (const json::exception& e) {
      report.issues.push_back({line_no, e.what()});
    } catch (const Error& e) {
      report.issues.push_back({line_no, e.what()});
    }
  }
  return corpus;
}

Corpus ingest_jsonl(const std::filesystem::path& path, IngestReport& report) {
  return parse_jsonl(read_file(path), report);
}

std::string serialize_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.documents()) {
    json obj;
    obj["id"] = d.id;
    obj["date"] = d.date ? json(*d.date) : json(nullptr);
    obj["title"] = d.title;
    obj["sentences"] = d.sentences;
    obj["source_tag"] = to_string(d.source_tag);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  write_file(path, serialize_jsonl(corpus));
}

std::vector<std::string> SentenceRule::split(std::string_view text) const {
  const std::u32string chars = utf8::decode(text);
  std::vector<std::string> out;
  std::u32string current;
  const auto flush = [&] {
    std::string s = utf8::normalize_space(utf8::encode(current));
    if (!s.empty()) out.push_back(std::move(s));
    current.clear();
  };
  for (std::size_t i = 0; i < chars.size(); ++i) {
    current.push_back(chars[i]);
    const bool terminal = terminators.find(chars[i]) != std::u32string::npos;
    if (terminal && (i + 1 == chars.size() || utf8::is_whitespace(chars[i + 1]))) flush();
  }
  flush();
  return out;
}

bool assigned_to_train(std::string_view document_id, double train_fraction, std::uint64_t seed) {
  const std::uint64_t h = mix64(fnv1a64(document_id) ^ mix64(seed));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < train_fraction;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_fraction,
                                       std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must be in (0, 1)");
  }
  Corpus train;
  Corpus valid;
  for (const auto& d : corpus.documents()) {
    (assigned_to_train(d.id, train_fraction, seed) ? train : valid).add(d);
  }
  return {std::move(train), std::move(valid)};
}

std::vector<NliRecord> parse_nli_tsv(std::string_view text, IngestReport& report) {
  std::vector<NliRecord> records;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  const auto split_tabs = [](const std::string& s) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = s.find('\t', start);
      fields.push_back(s.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    return fields;
  };

  std::optional<std::size_t> premise_col, hypothesis_col, split_col;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (!line.empty() && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      const auto header = split_tabs(line);
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "premise") premise_col = i;
        if (header[i] == "hypothesis") hypothesis_col = i;
        if (header[i] == "split") split_col = i;
      }
      if (!premise_col || !hypothesis_col || !split_col) {
        throw ParseError("NLI header must name premise, hypothesis and split columns");
      }
      continue;
    }
    if (line.empty()) continue;
    if (!utf8::valid(line)) {
      report.issues.push_back({line_no, "invalid UTF-8"});
      continue;
    }
    const auto fields = split_tabs(line);
    const std::size_t need = std::max({*premise_col, *hypothesis_col, *split_col}) + 1;
    if (fields.size() < need) {
      report.issues.push_back({line_no, "expected at least " + std::to_string(need) + " columns"});
      continue;
    }
    NliRecord r;
    r.premise = utf8::normalize_space(hangul::normalize(fields[*premise_col]));
    r.hypothesis = utf8::normalize_space(hangul::normalize(fields[*hypothesis_col]));
    const std::string& split = fields[*split_col];
    if (split == "train") {
      r.split = NliSplit::kTrain;
    } else if (split == "dev") {
      r.split = NliSplit::kDev;
    } else if (split == "test") {
      r.split = NliSplit::kTest;
    } else {
      report.issues.push_back({line_no, "unknown split '" + split + "'"});
      continue;
    }
    if (r.premise.empty() || r.hypothesis.empty()) {
      report.issues.push_back({line_no, "empty premise or hypothesis"});
      continue;
    }
    records.push_back(std::move(r));
  }
  if (line_no == 0) throw ParseError("NLI file has no header");
  return records;
}

std::vector<NliRecord> read_nli_tsv(const std::filesystem::path& path, IngestReport& report) {
  return parse_nli_tsv(read_file(path), report);
}

std::vector<std::string> nli_to_sentences(const std::vector<NliRecord>& records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.premise + " " + r.hypothesis);
  return out;
}

Corpus nli_to_corpus(const std::vector<NliRecord>& records) {
  Corpus corpus;
  const auto sentences = nli_to_sentences(records);
  std::size_t counters[3] = {0, 0, 0};
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto split = records[i].split;
    Document d;
    d.id = "nli-" + std::string(to_string(split)) + "-" +
           std::to_string(counters[static_cast<int>(split)]++);
    d.sentences = {sentences[i]};
    d.source_tag = SourceTag::kNli;
    corpus.add(std::move(d));
  }
  return corpus;
}

}  // namespace hanmlm
