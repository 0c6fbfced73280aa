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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hanmlm::utf8 {

// Decodes UTF-8, throwing ParseError on malformed input (overlongs,
// surrogates and out-of-range scalars included).
std::u32string decode(std::string_view text);

// Byte offset of the first malformed sequence, or nullopt if valid.
std::optional<std::size_t> first_invalid(std::string_view text);

inline bool valid(std::string_view text) { return !first_invalid(text).has_value(); }

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view text);
inline std::string encode(char32_t cp) {
  std::string s;
  append(s, cp);
  return s;
}

// Splits into one string per scalar value.
std::vector<std::string> characters(std::string_view text);

bool is_whitespace(char32_t cp);

// ASCII punctuation plus the general, CJK and full-width punctuation blocks.
bool is_punctuation(char32_t cp);

// Trims Unicode whitespace at both ends and collapses interior runs to
// a single ASCII space.
std::string normalize_space(std::string_view text);

}  // namespace hanmlm::utf8
