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

#include "hanmlm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "hanmlm/corpus.hpp"
#include "hanmlm/error.hpp"
#include "hanmlm/rng.hpp"

namespace hanmlm {
namespace {

constexpr std::string_view kMagic = "HANMLMCK";
constexpr char kLittleEndian = 'L';

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* what) {
    if (n > bytes_.size() - pos_) throw ParseError(std::string("checkpoint truncated while reading ") + what);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t u64(const char* what) {
    const auto s = take(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    return v;
  }
  std::uint32_t u32(const char* what) {
    const auto s = take(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const ModelParams& params) {
  std::string out(kMagic);
  put_u32(out, kCheckpointVersion);
  out.push_back(kLittleEndian);
  const std::string config = params.config.to_json();
  put_u64(out, config.size());
  out += config;
  const auto tensors = params.named_tensors();
  put_u64(out, tensors.size());
  for (const auto& [name, m] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u64(out, static_cast<std::uint64_t>(m->rows()));
    put_u64(out, static_cast<std::uint64_t>(m->cols()));
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>((*m)(r, c)));
    }
  }
  put_u64(out, fnv1a64(out));
  return out;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  write_file(tmp, serialize_checkpoint(params));
  std::filesystem::rename(tmp, path);
}

ModelParams deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size(), "magic") != kMagic) throw ParseError("not a checkpoint file (bad magic)");
  const std::uint32_t version = in.u32("version");
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  if (in.take(1, "byte order")[0] != kLittleEndian) throw ParseError("unsupported byte order tag");
  const std::uint64_t config_len = in.u64("config length");
  const ModelConfig config = ModelConfig::from_json(in.take(config_len, "config"));
  config.validate();

  ModelParams params = ModelParams::zeros(config);
  auto tensors = params.named_tensors();
  const std::uint64_t count = in.u64("tensor count");
  if (count != tensors.size()) {
    throw ParseError("checkpoint holds " + std::to_string(count) + " tensors, config implies " +
                     std::to_string(tensors.size()));
  }
  for (auto& [name, m] : tensors) {
    const std::uint32_t name_len = in.u32("tensor name length");
    const std::string_view stored = in.take(name_len, "tensor name");
    if (stored != name) {
      throw ParseError("expected tensor '" + name + "', found '" + std::string(stored) + "'");
    }
    const std::uint64_t rows = in.u64("rows");
    const std::uint64_t cols = in.u64("cols");
    if (rows != static_cast<std::uint64_t>(m->rows()) || cols != static_cast<std::uint64_t>(m->cols())) {
      throw ParseError("shape mismatch for " + name + ": file has " + std::to_string(rows) + "x" +
                       std::to_string(cols) + ", config implies " + std::to_string(m->rows()) + "x" +
                       std::to_string(m->cols()));
    }
    if (cols != 0 && rows > in.remaining() / 8 / cols) throw ParseError("checkpoint truncated in tensor " + name);
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = in.f64("tensor data");
    }
  }
  const std::size_t body_end = in.pos();
  const std::uint64_t checksum = in.u64("checksum");
  if (checksum != fnv1a64(bytes.substr(0, body_end))) throw ParseError("checkpoint checksum mismatch");
  if (in.remaining() != 0) throw ParseError("trailing bytes after checkpoint");
  return params;
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint not found: " + path.string());
  try {
    return deserialize_checkpoint(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void check_vocab_compatible(const ModelConfig& config, const Vocabulary& vocab) {
  if (config.vocab_size != vocab.size()) {
    throw InvalidArgument("checkpoint vocab_size " + std::to_string(config.vocab_size) +
                          " does not match vocabulary file size " + std::to_string(vocab.size()));
  }
}

}  // namespace hanmlm
