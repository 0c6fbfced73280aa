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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hanmlm {

class Corpus;

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kClsId = 2;
inline constexpr TokenId kSepId = 3;
inline constexpr TokenId kMaskId = 4;
inline constexpr std::array<std::string_view, 5> kSpecialTokens = {"[PAD]", "[UNK]", "[CLS]",
                                                                   "[SEP]", "[MASK]"};
inline constexpr std::string_view kContinuationPrefix = "##";

// Ordered subword inventory. Ids are dense, the five special tokens
// occupy ids 0..4, continuation pieces start with "##".
class Vocabulary {
 public:
  // Validates the invariants above; throws InvalidArgument otherwise.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  // One token per line, line number = id.
  static Vocabulary load(const std::filesystem::path& path);
  static Vocabulary parse(std::string_view text);

  // Loader for vocabularies produced by other tools: specials are moved
  // (or added) to ids 0..4, the remaining order is preserved.
  static Vocabulary parse_external(std::string_view text);

  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<TokenId> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

constexpr bool is_special(TokenId id) { return id >= 0 && id < 5; }

struct VocabBuildOptions {
  std::size_t target_size = 2000;
  std::size_t min_frequency = 1;
};

// WordPiece training. Starts from the character alphabet (word-initial
// characters plain, the rest "##"-prefixed) and repeatedly merges the
// adjacent pair maximizing count(ab) / (count(a) * count(b)); ties go
// to the higher pair count, then the lexicographically smaller merge.
Vocabulary build_vocab(std::span<const std::string> sentences, const VocabBuildOptions& options);
Vocabulary build_vocab(const Corpus& corpus, const VocabBuildOptions& options);

// Whitespace split with punctuation characters split off as words of
// their own.
std::vector<std::string> pre_tokenize(std::string_view text);

inline constexpr std::size_t kMaxCharsPerWord = 100;

// Greedy longest-match-first pieces for one word, or {"[UNK]"} when any
// part of the word cannot be matched.
std::vector<std::string> wordpiece(std::string_view word, const Vocabulary& vocab);

struct TokenizedSentence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> word_starts;  // 1 where a source word begins
};

TokenizedSentence tokenize(std::string_view text, const Vocabulary& vocab);

// [CLS] first [SEP] (second [SEP]) with segment ids.
struct EncodedSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> segments;
  std::vector<std::uint8_t> word_starts;

  std::size_t size() const { return ids.size(); }
};

// Without `second` the result is a single-sentence encoding. Tokens are
// removed from the end of the longer side until the sequence fits.
EncodedSequence encode_pair(std::string_view first, std::optional<std::string_view> second,
                            const Vocabulary& vocab, std::size_t max_len);
inline EncodedSequence encode_single(std::string_view text, const Vocabulary& vocab,
                                     std::size_t max_len) {
  return encode_pair(text, std::nullopt, vocab, max_len);
}

}  // namespace hanmlm
