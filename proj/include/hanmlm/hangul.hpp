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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hanmlm {

class Corpus;
class Vocabulary;

namespace hangul {

inline constexpr char32_t kSyllableBase = 0xAC00;
inline constexpr int kInitialCount = 19;
inline constexpr int kMedialCount = 21;
inline constexpr int kFinalCount = 28;  // index 0 means no final consonant
inline constexpr int kSyllableCount = kInitialCount * kMedialCount * kFinalCount;  // 11,172

// A precomposed syllable and its jamo indices.
struct Syllable {
  char32_t codepoint;
  int initial;
  int medial;
  int final;

  friend bool operator==(const Syllable&, const Syllable&) = default;
};

constexpr bool is_syllable(char32_t cp) {
  return cp >= kSyllableBase && cp < kSyllableBase + static_cast<char32_t>(kSyllableCount);
}

// nullopt for anything outside the precomposed block.
std::optional<Syllable> decompose(char32_t cp);

// Throws InvalidArgument if an index is out of range.
char32_t compose(int initial, int medial, int final = 0);

// Canonically composes conjoining jamo (L V [T], and LV + T) into
// precomposed syllables. Everything else passes through.
std::u32string compose_jamo(std::u32string_view text);
std::string normalize(std::string_view utf8_text);

struct SyllableMapEntry {
  char32_t source;
  std::string replacement;
  std::string note;
};

// Source syllable to replacement string. add() rejects entries that
// would make application non-idempotent.
class SyllableMap {
 public:
  SyllableMap() = default;

  // Table of DPRK spellings and their ROK counterparts shipped as the
  // default map.
  static SyllableMap builtin();

  // Tab-separated `source\treplacement\tnote`; blank and `#` lines skipped.
  static SyllableMap parse(std::string_view text);
  static SyllableMap load(const std::filesystem::path& path);
  std::string serialize() const;

  void add(char32_t source, std::string replacement, std::string note = {});

  const std::vector<SyllableMapEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::string* find(char32_t source) const;

 private:
  std::vector<SyllableMapEntry> entries_;
  std::unordered_map<char32_t, std::size_t> index_;
};

// Single left-to-right pass replacing every source syllable.
std::string apply_map(std::string_view text, const SyllableMap& map);

struct SyllableCount {
  char32_t syllable;
  std::size_t count;

  friend bool operator==(const SyllableCount&, const SyllableCount&) = default;
};

// Hangul syllables present in the text but in no vocabulary token,
// most frequent first, ties by codepoint.
std::vector<SyllableCount> find_novel_syllables(std::span<const std::string> sentences,
                                                const Vocabulary& vocab);
std::vector<SyllableCount> find_novel_syllables(const Corpus& corpus, const Vocabulary& vocab);

}  // namespace hangul
}  // namespace hanmlm
