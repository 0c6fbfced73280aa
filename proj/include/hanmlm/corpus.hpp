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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace hanmlm {

enum class SourceTag { kRodong, kNewYear, kNli, kOther };

std::string_view to_string(SourceTag tag);
std::optional<SourceTag> parse_source_tag(std::string_view text);

struct Document {
  std::string id;
  std::optional<std::string> date;  // ISO-8601 day
  std::string title;
  std::vector<std::string> sentences;
  SourceTag source_tag = SourceTag::kOther;

  friend bool operator==(const Document&, const Document&) = default;
};

// Write-once document store. Document ids are unique.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> documents);

  void add(Document doc);

  const std::vector<Document>& documents() const { return documents_; }
  std::size_t document_count() const { return documents_.size(); }
  std::size_t sentence_count() const { return sentence_count_; }
  bool empty() const { return sentence_count_ == 0; }

  // Every sentence in document order.
  std::vector<std::string> all_sentences() const;

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.documents_ == b.documents_; }

 private:
  std::vector<Document> documents_;
  std::unordered_set<std::string> ids_;
  std::size_t sentence_count_ = 0;
};

struct LineIssue {
  std::size_t line;
  std::string message;
};

// Lines that could not be ingested. Non-empty means the caller should warn.
struct IngestReport {
  std::vector<LineIssue> issues;
  bool clean() const { return issues.empty(); }
  std::string summary() const;
};

// One JSON object per line with fields id, date, title, sentences,
// source_tag. Malformed lines are skipped and reported.
Corpus parse_jsonl(std::string_view text, IngestReport& report);
Corpus ingest_jsonl(const std::filesystem::path& path, IngestReport& report);

std::string serialize_jsonl(const Corpus& corpus);
void save_jsonl(const Corpus& corpus, const std::filesystem::path& path);

// Splits on terminator characters that are followed by whitespace or the
// end of the text.
struct SentenceRule {
  std::u32string terminators = U".!?。";

  std::vector<std::string> split(std::string_view text) const;
};

// Deterministic partition at document granularity.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_fraction,
                                       std::uint64_t seed);

// True if the document is assigned to the training side.
bool assigned_to_train(std::string_view document_id, double train_fraction, std::uint64_t seed);

enum class NliSplit { kTrain, kDev, kTest };

std::string_view to_string(NliSplit split);

struct NliRecord {
  std::string premise;
  std::string hypothesis;
  NliSplit split = NliSplit::kTest;
};

// Tab-separated with a header naming premise, hypothesis and split
// columns (any order, extra columns ignored).
std::vector<NliRecord> parse_nli_tsv(std::string_view text, IngestReport& report);
std::vector<NliRecord> read_nli_tsv(const std::filesystem::path& path, IngestReport& report);

// premise + " " + hypothesis per record, order preserved.
std::vector<std::string> nli_to_sentences(const std::vector<NliRecord>& records);

// One single-sentence document per record.
Corpus nli_to_corpus(const std::vector<NliRecord>& records);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace hanmlm
