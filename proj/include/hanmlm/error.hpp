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

#include <stdexcept>
#include <string>

namespace hanmlm {

enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kParse,
  kNumeric,
};

// Base exception for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error InvalidArgument(const std::string& what) { return {ErrorKind::kInvalidArgument, what}; }
inline Error IoError(const std::string& what) { return {ErrorKind::kIo, what}; }
inline Error ParseError(const std::string& what) { return {ErrorKind::kParse, what}; }
inline Error NumericError(const std::string& what) { return {ErrorKind::kNumeric, what}; }

}  // namespace hanmlm
