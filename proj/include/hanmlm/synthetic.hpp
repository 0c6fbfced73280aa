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
#include <string>
#include <vector>

#include "hanmlm/corpus.hpp"

namespace hanmlm::synthetic {

// Two toy languages from one seeded grammar. They share nouns, subjects and
// the 이/가, 을/를 particle rule. B reassigns every object noun to a different
// verb, ends sentences with 네 instead of 다, and opens with fixed three-word groups
// spelled with syllables A never uses.
enum class Language { kA, kB };

std::string_view to_string(Language language);
Language parse_language(std::string_view text);

std::vector<std::string> sentences(Language language, std::size_t count, std::uint64_t seed);

// Documents of `per_document` sentences with ids "<lang>-000001".
Corpus corpus(Language language, std::size_t documents, std::size_t per_document, std::uint64_t seed);

// Object noun -> verb stem as used by each language.
std::string verb_for(Language language, std::string_view object_noun);

}  // namespace hanmlm::synthetic
