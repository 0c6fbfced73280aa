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

#include "hanmlm/synthetic.hpp"

#include <array>
#include <cstdio>

#include "hanmlm/error.hpp"
#include "hanmlm/hangul.hpp"
#include "hanmlm/rng.hpp"
#include "hanmlm/utf8.hpp"

namespace hanmlm::synthetic {
namespace {

constexpr std::array<std::string_view, 6> kSubjects = {"철수", "영희", "학생", "선생님", "아이", "어머니"};
constexpr std::array<std::string_view, 12> kObjects = {"사과", "빵", "밥", "책", "신문", "편지",
                                                       "물", "우유", "노래", "그림", "옷", "차"};
constexpr std::array<std::string_view, 6> kVerbs = {"먹었", "읽었", "마셨", "불렀", "그렸", "샀"};
// Verb index per object noun.
constexpr std::array<std::size_t, 12> kVerbA = {0, 0, 0, 1, 1, 1, 2, 2, 3, 4, 5, 5};
constexpr std::array<std::size_t, 12> kVerbB = {1, 2, 3, 4, 5, 0, 0, 1, 5, 3, 2, 4};
constexpr std::array<std::string_view, 6> kTimeA = {"어제", "오늘", "아침에", "저녁에", "주말에", "방금"};
constexpr std::array<std::array<std::string_view, 3>, 3> kGroupsB = {{
    {"돐잔치", "뙈기밭", "곬목길"},
    {"윁남", "췰성", "꾜또"},
    {"뙈놈", "돐날", "췰밭"},
}};

bool has_final(std::string_view word) {
  const auto cps = utf8::decode(word);
  const auto s = hangul::decompose(cps.back());
  return s && s->final != 0;
}

std::string with_particle(std::string_view noun, std::string_view with_final, std::string_view without) {
  return std::string(noun) + std::string(has_final(noun) ? with_final : without);
}

std::size_t object_index(std::string_view noun) {
  for (std::size_t i = 0; i < kObjects.size(); ++i) {
    if (kObjects[i] == noun) return i;
  }
  throw InvalidArgument("unknown object noun '" + std::string(noun) + "'");
}

}  // namespace

std::string_view to_string(Language language) { return language == Language::kA ? "A" : "B"; }

Language parse_language(std::string_view text) {
  if (text == "A" || text == "a") return Language::kA;
  if (text == "B" || text == "b") return Language::kB;
  throw InvalidArgument("unknown synthetic language '" + std::string(text) + "'");
}

std::string verb_for(Language language, std::string_view object_noun) {
  const std::size_t i = object_index(object_noun);
  return std::string(kVerbs[language == Language::kA ? kVerbA[i] : kVerbB[i]]);
}

std::vector<std::string> sentences(Language language, std::size_t count, std::uint64_t seed) {
  Rng rng(derive_seed(seed, language == Language::kA ? 0xA : 0xB));
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::string s;
    if (language == Language::kA) {
      s += kTimeA[rng.below(kTimeA.size())];
    } else {
      const auto& group = kGroupsB[rng.below(kGroupsB.size())];
      s += std::string(group[0]) + " " + std::string(group[1]) + " " + std::string(group[2]);
    }
    const auto subject = kSubjects[rng.below(kSubjects.size())];
    const std::size_t object = rng.below(kObjects.size());
    s += " " + with_particle(subject, "이", "가");
    s += " " + with_particle(kObjects[object], "을", "를");
    s += " " + std::string(kVerbs[language == Language::kA ? kVerbA[object] : kVerbB[object]]);
    s += language == Language::kA ? "다" : "네";
    s += " .";
    out.push_back(std::move(s));
  }
  return out;
}

Corpus corpus(Language language, std::size_t documents, std::size_t per_document, std::uint64_t seed) {
  if (per_document == 0) throw InvalidArgument("sentences per document must be > 0");
  const auto all = sentences(language, documents * per_document, seed);
  Corpus c;
  for (std::size_t d = 0; d < documents; ++d) {
    char id[32];
    std::snprintf(id, sizeof id, "%s-%06zu", std::string(to_string(language)).c_str(), d + 1);
    Document doc;
    doc.id = id;
    doc.title = std::string("synthetic ") + std::string(to_string(language));
    doc.sentences.assign(all.begin() + static_cast<std::ptrdiff_t>(d * per_document),
                         all.begin() + static_cast<std::ptrdiff_t>((d + 1) * per_document));
    doc.source_tag = SourceTag::kOther;
    c.add(std::move(doc));
  }
  return c;
}

}  // namespace hanmlm::synthetic
