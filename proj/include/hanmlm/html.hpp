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

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hanmlm/corpus.hpp"

namespace hanmlm::html {

// Minimal forgiving DOM: elements and text, no namespaces or scripts.
struct Node {
  std::string tag;  // empty for text nodes
  std::string text;
  std::string id;
  std::vector<std::string> classes;
  std::vector<std::unique_ptr<Node>> children;
  Node* parent = nullptr;

  bool is_text() const { return tag.empty(); }
  // Descendant text with block boundaries turned into spaces.
  std::string text_content() const;
};

// The returned root is a synthetic "#document" element.
std::unique_ptr<Node> parse(std::string_view html);

// Decodes named (amp, lt, gt, quot, apos, nbsp) and numeric references.
std::string decode_entities(std::string_view text);

// Simple selectors: compound `tag#id.class` parts joined by descendant
// whitespace. Results are in document order.
std::vector<const Node*> select(const Node& root, std::string_view selector);

struct ExtractionRules {
  std::string title = "h1";
  std::string date;  // empty: articles carry no date
  std::string body = "article";
  std::string paragraph = "p";
  SentenceRule sentences;
  SourceTag source_tag = SourceTag::kRodong;

  // JSON object with keys title, date, body, paragraph, terminators,
  // source_tag; missing keys keep their defaults.
  static ExtractionRules from_json(std::string_view text);
};

// Throws ParseError("<field> not found") when a configured selector
// matches nothing.
Document extract_article(std::string_view html, const ExtractionRules& rules, std::string id);

// Recognizes YYYY-MM-DD, YYYY.MM.DD, YYYY/MM/DD and 2021년 3월 5일 forms.
std::optional<std::string> parse_day(std::string_view text);

struct DirectoryIngest {
  Corpus corpus;
  IngestReport report;  // line field holds the 1-based file index
  std::vector<std::string> failed_files;
};

// Extracts every *.html file (sorted by name); ids are the file stems.
DirectoryIngest ingest_html_dir(const std::filesystem::path& dir, const ExtractionRules& rules);

}  // namespace hanmlm::html
