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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hanmlm/error.hpp"
#include "hanmlm/rng.hpp"
#include "hanmlm/synthetic.hpp"
#include "hanmlm/tokenizer.hpp"
#include "hanmlm/utf8.hpp"

using namespace hanmlm;

namespace {

std::vector<std::string> with_specials(std::vector<std::string> rest) {
  std::vector<std::string> t(kSpecialTokens.begin(), kSpecialTokens.end());
  t.insert(t.end(), rest.begin(), rest.end());
  return t;
}

// Straightforward merge loop: every word occurrence is kept separately and
// scores are compared as long double quotients.
std::vector<std::string> oracle_vocab(const std::vector<std::string>& sentences, std::size_t target) {
  std::vector<std::vector<std::string>> words;
  for (const auto& s : sentences) {
    for (const auto& w : pre_tokenize(s)) {
      std::vector<std::string> sym;
      const auto chars = utf8::characters(w);
      for (std::size_t i = 0; i < chars.size(); ++i) sym.push_back(i == 0 ? chars[i] : "##" + chars[i]);
      words.push_back(sym);
    }
  }
  std::map<std::string, int> units;
  for (const auto& w : words) {
    for (const auto& s : w) units[s] = 1;
  }
  std::vector<std::string> tokens = with_specials({});
  for (const auto& [u, _] : units) tokens.push_back(u);
  while (tokens.size() < target) {
    std::map<std::string, long double> single;
    std::map<std::pair<std::string, std::string>, long double> pairs;
    for (const auto& w : words) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        single[w[i]] += 1;
        if (i + 1 < w.size()) pairs[{w[i], w[i + 1]}] += 1;
      }
    }
    if (pairs.empty()) break;
    std::optional<std::pair<std::string, std::string>> best;
    long double best_score = -1, best_count = 0;
    std::string best_merged;
    for (const auto& [p, c] : pairs) {
      const long double score = c / (single[p.first] * single[p.second]);
      const std::string merged = p.first + (p.second.starts_with("##") ? p.second.substr(2) : p.second);
      if (!best || score > best_score ||
          (score == best_score && (c > best_count || (c == best_count && merged < best_merged)))) {
        best = p;
        best_score = score;
        best_count = c;
        best_merged = merged;
      }
    }
    for (auto& w : words) {
      std::vector<std::string> out;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (i + 1 < w.size() && w[i] == best->first && w[i + 1] == best->second) {
          out.push_back(best_merged);
          ++i;
        } else {
          out.push_back(w[i]);
        }
      }
      w = out;
    }
    if (std::find(tokens.begin(), tokens.end(), best_merged) == tokens.end()) tokens.push_back(best_merged);
  }
  return tokens;
}

// Whether the word splits into vocabulary pieces at all.
bool segmentable(const std::u32string& w, const Vocabulary& vocab) {
  std::vector<bool> ok(w.size() + 1, false);
  ok[0] = true;
  for (std::size_t end = 1; end <= w.size(); ++end) {
    for (std::size_t start = 0; start < end && !ok[end]; ++start) {
      if (!ok[start]) continue;
      const std::string piece = (start ? "##" : "") + utf8::encode(w.substr(start, end - start));
      ok[end] = vocab.contains(piece);
    }
  }
  return ok[w.size()];
}

}  // namespace

TEST_SUITE("tokenizer") {
  TEST_CASE("vocabulary invariants") {
    CHECK_NOTHROW(Vocabulary::from_tokens(with_specials({"a"})));
    CHECK_THROWS_AS(Vocabulary::from_tokens({"a"}), Error);
    CHECK_THROWS_AS(Vocabulary::from_tokens(with_specials({"a", "a"})), Error);
    CHECK_THROWS_AS(Vocabulary::from_tokens(with_specials({"##"})), Error);
    const auto v = Vocabulary::from_tokens(with_specials({"a", "##b"}));
    CHECK(Vocabulary::parse(v.serialize()) == v);
    CHECK(v.find("##b") == 6);
    const auto ext = Vocabulary::parse_external("x\n[CLS]\ny\n");
    CHECK(ext.token(kClsId) == "[CLS]");
    CHECK(ext.token(5) == "x");
    CHECK(ext.token(6) == "y");
  }

  TEST_CASE("pre-tokenization splits punctuation") {
    CHECK(pre_tokenize("철수가 밥을, 먹었다.") ==
          std::vector<std::string>{"철수가", "밥을", ",", "먹었다", "."});
  }

  TEST_CASE("aaab merges") {
    const std::vector<std::string> corpus = {"aaab aaab aaab"};
    // Specials plus the three character units already fill 8 slots.
    CHECK_THROWS_WITH_AS(build_vocab(corpus, {8, 1}), "vocabulary budget too small", Error);
    // (a,##a) and (##a,##b) both score 3/18; ##ab wins the lexical tie-break.
    const auto v = build_vocab(corpus, {9, 1});
    CHECK(v.tokens() == with_specials({"##a", "##b", "a", "##ab"}));
    CHECK(v.tokens() == oracle_vocab(corpus, 9));
    CHECK(build_vocab(corpus, {12, 1}).tokens() == oracle_vocab(corpus, 12));
  }

  TEST_CASE("single character corpus") {
    const std::vector<std::string> corpus = {"c c c", "c"};
    CHECK(build_vocab(corpus, {50, 1}).tokens() == with_specials({"c"}));
  }

  TEST_CASE("min frequency above corpus size") {
    const std::vector<std::string> corpus = {"ab ba", "abc"};
    const auto v = build_vocab(corpus, {50, 100});
    CHECK(v.size() == kSpecialTokens.size());
    CHECK_THROWS_AS(build_vocab(corpus, {50, 0}), Error);
    CHECK_THROWS_AS(build_vocab(std::vector<std::string>{" "}, {50, 1}), Error);
  }

  TEST_CASE("builder matches the oracle on random corpora") {
    Rng rng(11);
    const std::vector<std::string> alphabet = {"가", "나", "다", "a", "b"};
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::string> corpus;
      for (int s = 0; s < 6; ++s) {
        std::string sentence;
        for (int w = 0; w < 4; ++w) {
          const auto len = 1 + rng.below(5);
          for (std::size_t k = 0; k < len; ++k) sentence += alphabet[rng.below(alphabet.size())];
          sentence += ' ';
        }
        corpus.push_back(sentence);
      }
      for (std::size_t target : {20u, 30u, 45u}) {
        CAPTURE(trial);
        CAPTURE(target);
        CHECK(build_vocab(corpus, {target, 1}).tokens() == oracle_vocab(corpus, target));
      }
    }
  }

  TEST_CASE("synthetic corpus vocabulary matches the oracle") {
    const auto corpus = synthetic::sentences(synthetic::Language::kB, 30, 4);
    CHECK(build_vocab(corpus, {80, 1}).tokens() == oracle_vocab(corpus, 80));
  }

  TEST_CASE("greedy longest match") {
    const auto v = Vocabulary::from_tokens(with_specials({"a", "##a", "##b", "aa", "##ab"}));
    CHECK(wordpiece("aaab", v) == std::vector<std::string>{"aa", "##ab"});
    CHECK(wordpiece("aa", v) == std::vector<std::string>{"aa"});
    CHECK(wordpiece("ab", v) == std::vector<std::string>{"a", "##b"});
    CHECK(wordpiece("b", v) == std::vector<std::string>{"[UNK]"});
    CHECK(wordpiece(std::string(101, 'a'), v) == std::vector<std::string>{"[UNK]"});
  }

  TEST_CASE("unknown syllable makes the whole word unknown") {
    const auto v = Vocabulary::from_tokens(with_specials({"에", "##도", "도", "##에"}));
    const auto t = tokenize("에돎도 에도", v);
    CHECK(t.ids == std::vector<TokenId>{kUnkId, *v.find("에"), *v.find("##도")});
    CHECK(t.word_starts == std::vector<std::uint8_t>{1, 1, 0});
  }

  TEST_CASE("greedy output agrees with segmentability") {
    const auto corpus = synthetic::sentences(synthetic::Language::kA, 200, 5);
    const auto v = build_vocab(corpus, {90, 1});
    Rng rng(3);
    const auto chars = utf8::characters("어제오늘철수영희밥을먹었다돐");
    std::size_t unknown = 0;
    for (int i = 0; i < 300; ++i) {
      std::string word;
      const auto len = 1 + rng.below(6);
      for (std::size_t k = 0; k < len; ++k) word += chars[rng.below(chars.size())];
      const auto pieces = wordpiece(word, v);
      const bool unk = pieces == std::vector<std::string>{"[UNK]"};
      CAPTURE(word);
      CHECK(unk == !segmentable(utf8::decode(word), v));
      unknown += unk;
      if (!unk) {
        std::string joined;
        for (std::size_t k = 0; k < pieces.size(); ++k) {
          CHECK(v.contains(pieces[k]));
          joined += k ? pieces[k].substr(2) : pieces[k];
        }
        CHECK(joined == word);
      }
    }
    CHECK(unknown > 0);
    CHECK(unknown < 300);
  }

  TEST_CASE("pair encoding") {
    const auto v = Vocabulary::from_tokens(with_specials({"a", "b", "c", "."}));
    const auto empty = encode_pair("", std::string_view(""), v, 16);
    CHECK(empty.ids == std::vector<TokenId>{kClsId, kSepId, kSepId});
    CHECK(empty.segments == std::vector<std::uint8_t>{0, 0, 1});
    const auto single = encode_single("a b", v, 16);
    CHECK(single.ids == std::vector<TokenId>{kClsId, 5, 6, kSepId});
    CHECK(single.segments == std::vector<std::uint8_t>{0, 0, 0, 0});
    const auto pair = encode_pair("a b .", std::string_view("c ."), v, 16);
    CHECK(pair.ids == std::vector<TokenId>{kClsId, 5, 6, 8, kSepId, 7, 8, kSepId});
    CHECK(pair.segments == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1, 1, 1});
    // Truncation removes from the end of the longer side.
    const auto cut = encode_pair("a b c a b", std::string_view("c c"), v, 8);
    CHECK(cut.ids == std::vector<TokenId>{kClsId, 5, 6, 7, kSepId, 7, 7, kSepId});
    CHECK_THROWS_AS(encode_pair("a", std::string_view("b"), v, 2), Error);
  }
}
