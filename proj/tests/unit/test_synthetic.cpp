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

#include <string>
#include <vector>

#include "hanmlm/error.hpp"
#include "hanmlm/hangul.hpp"
#include "hanmlm/synthetic.hpp"
#include "hanmlm/utf8.hpp"

using namespace hanmlm;

TEST_SUITE("synthetic") {
  TEST_CASE("deterministic and seed dependent") {
    const auto a = synthetic::sentences(synthetic::Language::kA, 50, 1);
    CHECK(a == synthetic::sentences(synthetic::Language::kA, 50, 1));
    CHECK(a != synthetic::sentences(synthetic::Language::kA, 50, 2));
    CHECK(a.size() == 50);
  }

  TEST_CASE("language B uses the divergent syllables") {
    const auto map = hangul::SyllableMap::builtin();
    std::size_t with_mapped = 0;
    for (const auto& s : synthetic::sentences(synthetic::Language::kB, 100, 1)) {
      with_mapped += hangul::apply_map(s, map) != s;
      CHECK(s.ends_with(" ."));
    }
    CHECK(with_mapped == 100);
    for (const auto& s : synthetic::sentences(synthetic::Language::kA, 100, 1)) CHECK(hangul::apply_map(s, map) == s);
  }

  TEST_CASE("particles follow the final consonant") {
    for (const auto& s : synthetic::sentences(synthetic::Language::kA, 200, 3)) {
      const auto words = utf8::characters(s);
      CHECK(s.find("사과을") == std::string::npos);
      CHECK(s.find("책를") == std::string::npos);
      CHECK(s.find("학생가") == std::string::npos);
      CHECK(s.find("아이이 ") == std::string::npos);
      CHECK_FALSE(words.empty());
    }
  }

  TEST_CASE("verbs differ between languages") {
    CHECK(synthetic::verb_for(synthetic::Language::kA, "사과") == "먹었");
    CHECK(synthetic::verb_for(synthetic::Language::kB, "사과") == "읽었");
    CHECK_THROWS_AS(synthetic::verb_for(synthetic::Language::kA, "없음"), Error);
  }

  TEST_CASE("corpus layout") {
    const auto c = synthetic::corpus(synthetic::Language::kB, 4, 3, 7);
    CHECK(c.document_count() == 4);
    CHECK(c.sentence_count() == 12);
    CHECK(c.documents()[0].id == "B-000001");
    CHECK(synthetic::parse_language("a") == synthetic::Language::kA);
    CHECK_THROWS_AS(synthetic::parse_language("c"), Error);
  }
}
