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

#include "hanmlm/hangul.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "hanmlm/corpus.hpp"
#include "hanmlm/error.hpp"
#include "hanmlm/tokenizer.hpp"
#include "hanmlm/utf8.hpp"

namespace hanmlm::hangul {
namespace {

constexpr char32_t kLeadBase = 0x1100;
constexpr char32_t kVowelBase = 0x1161;
constexpr char32_t kTailBase = 0x11A7;  // tail index 0 is "none"

bool is_lead(char32_t c) { return c >= kLeadBase && c < kLeadBase + kInitialCount; }
bool is_vowel(char32_t c) { return c >= kVowelBase && c < kVowelBase + kMedialCount; }
bool is_tail(char32_t c) { return c > kTailBase && c < kTailBase + kFinalCount; }

}  // namespace

std::optional<Syllable> decompose(char32_t cp) {
  if (!is_syllable(cp)) return std::nullopt;
  const int offset = static_cast<int>(cp - kSyllableBase);
  return Syllable{cp, offset / (kMedialCount * kFinalCount),
                  (offset % (kMedialCount * kFinalCount)) / kFinalCount, offset % kFinalCount};
}

char32_t compose(int initial, int medial, int final) {
  if (initial < 0 || initial >= kInitialCount || medial < 0 || medial >= kMedialCount ||
      final < 0 || final >= kFinalCount) {
    throw InvalidArgument("jamo index out of range");
  }
  return kSyllableBase +
         static_cast<char32_t>((initial * kMedialCount + medial) * kFinalCount + final);
}

std::u32string compose_jamo(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (!out.empty()) {
      const char32_t last = out.back();
      if (is_lead(last) && is_vowel(c)) {
        out.back() = compose(static_cast<int>(last - kLeadBase), static_cast<int>(c - kVowelBase));
        continue;
      }
      if (is_tail(c)) {
        if (auto s = decompose(last); s && s->final == 0) {
          out.back() = compose(s->initial, s->medial, static_cast<int>(c - kTailBase));
          continue;
        }
      }
    }
    out.push_back(c);
  }
  return out;
}

std::string normalize(std::string_view utf8_text) {
  return utf8::encode(compose_jamo(utf8::decode(utf8_text)));
}

SyllableMap SyllableMap::builtin() {
  SyllableMap map;
  map.add(U'돐', "주년", "anniversary");
  map.add(U'윁', "베트", "as in Vietnam");
  map.add(U'췰', "칠", "as in Germany");
  map.add(U'꾜', "쿄", "as in Tokyo");
  map.add(U'뙈', "떼", "");
  map.add(U'곬', "골", "");
  return map;
}

SyllableMap SyllableMap::parse(std::string_view text) {
  SyllableMap map;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = "syllable map line " + std::to_string(line_no);
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(where + ": expected source<TAB>replacement[<TAB>note]");
    }
    const std::u32string source = compose_jamo(utf8::decode(fields[0]));
    if (source.size() != 1) throw ParseError(where + ": source must be a single syllable");
    try {
      map.add(source[0], normalize(fields[1]), fields.size() == 3 ? fields[2] : std::string{});
    } catch (const Error& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return map;
}

SyllableMap SyllableMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read syllable map " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string SyllableMap::serialize() const {
  std::string out = "# source\treplacement\tnote\n";
  for (const auto& e : entries_) {
    out += utf8::encode(e.source) + '\t' + e.replacement + '\t' + e.note + '\n';
  }
  return out;
}

void SyllableMap::add(char32_t source, std::string replacement, std::string note) {
  if (!is_syllable(source)) throw InvalidArgument("map source is not a Hangul syllable");
  const std::u32string repl = utf8::decode(replacement);
  if (repl.empty()) throw InvalidArgument("empty replacement");
  if (!std::all_of(repl.begin(), repl.end(), [](char32_t c) { return is_syllable(c); })) {
    throw InvalidArgument("replacement must consist of Hangul syllables");
  }
  if (repl.size() == 1 && repl[0] == source) {
    throw InvalidArgument("source maps to itself");
  }
  if (index_.contains(source)) {
    throw InvalidArgument("duplicate source " + utf8::encode(source));
  }
  for (char32_t c : repl) {
    if (c == source || index_.contains(c)) {
      throw InvalidArgument("replacement contains a mapped source " + utf8::encode(c));
    }
  }
  for (const auto& e : entries_) {
    if (e.replacement.find(utf8::encode(source)) != std::string::npos) {
      throw InvalidArgument("source " + utf8::encode(source) + " occurs in an earlier replacement");
    }
  }
  index_.emplace(source, entries_.size());
  entries_.push_back({source, std::move(replacement), std::move(note)});
}

const std::string* SyllableMap::find(char32_t source) const {
  const auto it = index_.find(source);
  return it == index_.end() ? nullptr : &entries_[it->second].replacement;
}

std::string apply_map(std::string_view text, const SyllableMap& map) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : utf8::decode(text)) {
    if (const std::string* r = map.find(c)) {
      out += *r;
    } else {
      utf8::append(out, c);
    }
  }
  return out;
}

std::vector<SyllableCount> find_novel_syllables(std::span<const std::string> sentences,
                                                const Vocabulary& vocab) {
  std::unordered_set<char32_t> known;
  for (const auto& token : vocab.tokens()) {
    for (char32_t c : utf8::decode(token)) {
      if (is_syllable(c)) known.insert(c);
    }
  }
  std::map<char32_t, std::size_t> counts;
  for (const auto& sentence : sentences) {
    for (char32_t c : compose_jamo(utf8::decode(sentence))) {
      if (is_syllable(c) && !known.contains(c)) ++counts[c];
    }
  }
  std::vector<SyllableCount> out;
  out.reserve(counts.size());
  for (const auto& [c, n] : counts) out.push_back({c, n});
  std::stable_sort(out.begin(), out.end(),
                   [](const SyllableCount& a, const SyllableCount& b) { return a.count > b.count; });
  return out;
}

std::vector<SyllableCount> find_novel_syllables(const Corpus& corpus, const Vocabulary& vocab) {
  return find_novel_syllables(corpus.all_sentences(), vocab);
}

}  // namespace hanmlm::hangul
