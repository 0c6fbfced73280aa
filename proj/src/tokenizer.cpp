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

#include "hanmlm/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "hanmlm/corpus.hpp"
#include "hanmlm/error.hpp"
#include "hanmlm/utf8.hpp"

namespace hanmlm {
namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(start, nl - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

bool starts_with_prefix(std::string_view s) { return s.starts_with(kContinuationPrefix); }

std::string strip_prefix(std::string_view s) {
  return std::string(starts_with_prefix(s) ? s.substr(kContinuationPrefix.size()) : s);
}

// Exact comparison of a/b against c/d for the merge score.
int compare_ratio(std::uint64_t a, unsigned __int128 b, std::uint64_t c, unsigned __int128 d) {
  const unsigned __int128 lhs = static_cast<unsigned __int128>(a) * d;
  const unsigned __int128 rhs = static_cast<unsigned __int128>(c) * b;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

}  // namespace

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kSpecialTokens.size()) {
    throw InvalidArgument("vocabulary must start with the five special tokens");
  }
  Vocabulary v;
  v.ids_.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (i < kSpecialTokens.size()) {
      if (t != kSpecialTokens[i]) {
        throw InvalidArgument("expected " + std::string(kSpecialTokens[i]) + " at id " +
                              std::to_string(i) + ", found '" + t + "'");
      }
    } else {
      if (t.empty() || t == kContinuationPrefix) throw InvalidArgument("empty token at id " + std::to_string(i));
      if (std::find(kSpecialTokens.begin(), kSpecialTokens.end(), t) != kSpecialTokens.end()) {
        throw InvalidArgument("special token " + t + " repeated at id " + std::to_string(i));
      }
      if (!utf8::valid(t)) throw InvalidArgument("token at id " + std::to_string(i) + " is not UTF-8");
    }
    if (!v.ids_.emplace(t, static_cast<TokenId>(i)).second) {
      throw InvalidArgument("duplicate token '" + t + "' at id " + std::to_string(i));
    }
  }
  v.tokens_ = std::move(tokens);
  return v;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  auto lines = split_lines(text);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return from_tokens(std::move(lines));
}

Vocabulary Vocabulary::parse_external(std::string_view text) {
  std::vector<std::string> tokens(kSpecialTokens.begin(), kSpecialTokens.end());
  for (auto& line : split_lines(text)) {
    if (line.empty()) continue;
    if (std::find(kSpecialTokens.begin(), kSpecialTokens.end(), line) != kSpecialTokens.end()) continue;
    tokens.push_back(std::move(line));
  }
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocabulary " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  out << serialize();
  if (!out) throw IoError("write failed for " + path.string());
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> pre_tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (char32_t c : utf8::decode(text)) {
    if (utf8::is_whitespace(c)) {
      flush();
    } else if (utf8::is_punctuation(c)) {
      flush();
      words.push_back(utf8::encode(c));
    } else {
      utf8::append(current, c);
    }
  }
  flush();
  return words;
}

Vocabulary build_vocab(std::span<const std::string> sentences, const VocabBuildOptions& options) {
  if (options.min_frequency < 1) throw InvalidArgument("min_frequency must be at least 1");

  std::map<std::string, std::uint64_t> word_counts;
  for (const auto& s : sentences) {
    for (auto& w : pre_tokenize(s)) ++word_counts[w];
  }
  if (word_counts.empty()) throw InvalidArgument("empty corpus");

  // Symbol sequences per word type, in the word_counts order.
  struct Word {
    std::vector<std::string> symbols;
    std::uint64_t count;
  };
  std::map<std::string, std::uint64_t> unit_counts;
  std::vector<Word> words;
  words.reserve(word_counts.size());
  for (const auto& [text, count] : word_counts) {
    Word w{{}, count};
    const auto chars = utf8::characters(text);
    for (std::size_t i = 0; i < chars.size(); ++i) {
      w.symbols.push_back(i == 0 ? chars[i] : std::string(kContinuationPrefix) + chars[i]);
      unit_counts[w.symbols.back()] += count;
    }
    words.push_back(std::move(w));
  }

  std::vector<std::string> tokens(kSpecialTokens.begin(), kSpecialTokens.end());
  for (const auto& [unit, count] : unit_counts) {
    if (count >= options.min_frequency) tokens.push_back(unit);
  }
  if (options.target_size <= tokens.size() && tokens.size() > kSpecialTokens.size()) {
    throw InvalidArgument("vocabulary budget too small");
  }

  // Words with a dropped character can never be matched; they do not
  // take part in merging.
  std::erase_if(words, [&](const Word& w) {
    return std::any_of(w.symbols.begin(), w.symbols.end(),
                       [&](const std::string& s) { return unit_counts[s] < options.min_frequency; });
  });

  std::unordered_map<std::string, bool> in_vocab;
  for (const auto& t : tokens) in_vocab[t] = true;

  while (tokens.size() < options.target_size) {
    std::map<std::string, std::uint64_t> symbol_counts;
    std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i < w.symbols.size(); ++i) {
        symbol_counts[w.symbols[i]] += w.count;
        if (i + 1 < w.symbols.size()) pair_counts[{w.symbols[i], w.symbols[i + 1]}] += w.count;
      }
    }

    const std::pair<std::string, std::string>* best = nullptr;
    std::uint64_t best_count = 0;
    unsigned __int128 best_denominator = 1;
    std::string best_merged;
    for (const auto& [pair, count] : pair_counts) {
      if (count < options.min_frequency) continue;
      const unsigned __int128 denominator =
          static_cast<unsigned __int128>(symbol_counts[pair.first]) * symbol_counts[pair.second];
      std::string merged = pair.first + strip_prefix(pair.second);
      bool better = best == nullptr;
      if (!better) {
        const int cmp = compare_ratio(count, denominator, best_count, best_denominator);
        better = cmp > 0 || (cmp == 0 && (count > best_count ||
                                          (count == best_count && merged < best_merged)));
      }
      if (better) {
        best = &pair;
        best_count = count;
        best_denominator = denominator;
        best_merged = std::move(merged);
      }
    }
    if (best == nullptr) break;

    const auto [left, right] = *best;
    for (auto& w : words) {
      std::vector<std::string> merged;
      merged.reserve(w.symbols.size());
      for (std::size_t i = 0; i < w.symbols.size(); ++i) {
        if (i + 1 < w.symbols.size() && w.symbols[i] == left && w.symbols[i + 1] == right) {
          merged.push_back(best_merged);
          ++i;
        } else {
          merged.push_back(std::move(w.symbols[i]));
        }
      }
      w.symbols = std::move(merged);
    }
    if (!in_vocab[best_merged]) {
      in_vocab[best_merged] = true;
      tokens.push_back(best_merged);
    }
  }
  return Vocabulary::from_tokens(std::move(tokens));
}

Vocabulary build_vocab(const Corpus& corpus, const VocabBuildOptions& options) {
  return build_vocab(corpus.all_sentences(), options);
}

std::vector<std::string> wordpiece(std::string_view word, const Vocabulary& vocab) {
  const std::u32string chars = utf8::decode(word);
  if (chars.empty()) return {};
  if (chars.size() > kMaxCharsPerWord) return {std::string(kSpecialTokens[kUnkId])};
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < chars.size()) {
    std::size_t end = chars.size();
    std::string found;
    while (end > start) {
      std::string candidate = start > 0 ? std::string(kContinuationPrefix) : std::string{};
      candidate += utf8::encode(std::u32string_view(chars).substr(start, end - start));
      if (vocab.contains(candidate)) {
        found = std::move(candidate);
        break;
      }
      --end;
    }
    if (found.empty()) return {std::string(kSpecialTokens[kUnkId])};
    pieces.push_back(std::move(found));
    start = end;
  }
  return pieces;
}

TokenizedSentence tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenizedSentence out;
  for (const auto& word : pre_tokenize(text)) {
    bool first = true;
    for (const auto& piece : wordpiece(word, vocab)) {
      out.ids.push_back(*vocab.find(piece));
      out.word_starts.push_back(first ? 1 : 0);
      first = false;
    }
  }
  return out;
}

EncodedSequence encode_pair(std::string_view first, std::optional<std::string_view> second,
                            const Vocabulary& vocab, std::size_t max_len) {
  const std::size_t overhead = second ? 3 : 2;
  if (max_len < overhead) throw InvalidArgument("max_len too small for the special tokens");

  TokenizedSentence a = tokenize(first, vocab);
  TokenizedSentence b = second ? tokenize(*second, vocab) : TokenizedSentence{};
  while (a.ids.size() + b.ids.size() + overhead > max_len) {
    TokenizedSentence& longer = a.ids.size() > b.ids.size() ? a : b;
    longer.ids.pop_back();
    longer.word_starts.pop_back();
  }

  EncodedSequence out;
  const auto push = [&](TokenId id, std::uint8_t segment, std::uint8_t start) {
    out.ids.push_back(id);
    out.segments.push_back(segment);
    out.word_starts.push_back(start);
  };
  push(kClsId, 0, 0);
  for (std::size_t i = 0; i < a.ids.size(); ++i) push(a.ids[i], 0, a.word_starts[i]);
  push(kSepId, 0, 0);
  if (second) {
    for (std::size_t i = 0; i < b.ids.size(); ++i) push(b.ids[i], 1, b.word_starts[i]);
    push(kSepId, 1, 0);
  }
  return out;
}

}  // namespace hanmlm
