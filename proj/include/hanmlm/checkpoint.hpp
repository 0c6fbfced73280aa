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
#include <string>

#include "hanmlm/model.hpp"
#include "hanmlm/tokenizer.hpp"

namespace hanmlm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary container documented in docs/checkpoint-format.md. The file
// is written to a temporary name and renamed into place.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
std::string serialize_checkpoint(const ModelParams& params);

// Throws ParseError on truncation, checksum mismatch, unknown version,
// or tensors whose names or shapes disagree with the embedded config.
ModelParams load_checkpoint(const std::filesystem::path& path);
ModelParams deserialize_checkpoint(std::string_view bytes);

// Throws InvalidArgument naming both sizes when they differ.
void check_vocab_compatible(const ModelConfig& config, const Vocabulary& vocab);

}  // namespace hanmlm
