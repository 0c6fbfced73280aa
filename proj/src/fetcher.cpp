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

#include "hanmlm/fetcher.hpp"

#include <fstream>
#include <regex>
#include <thread>

#include <httplib.h>

#include "hanmlm/corpus.hpp"
#include "hanmlm/error.hpp"

namespace hanmlm {
namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  static const std::regex kUrl(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw InvalidArgument("unsupported URL (plain http only): " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

ArticleFetcher::ArticleFetcher(FetchOptions options) : options_(std::move(options)) {
  if (options_.out_dir.empty()) throw InvalidArgument("fetcher needs an output directory");
  std::filesystem::create_directories(options_.out_dir);
  if (options_.journal.empty()) options_.journal = options_.out_dir / "journal.txt";
  std::ifstream in(options_.journal);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) done_.insert(line);
  }
}

std::string ArticleFetcher::file_name_for(const std::string& url) {
  std::string name;
  for (char c : split_url(url).path) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    name.push_back(keep ? c : '_');
  }
  while (!name.empty() && name.front() == '_') name.erase(name.begin());
  if (name.empty()) name = "index";
  return name + ".html";
}

FetchResult ArticleFetcher::fetch(const std::vector<std::string>& urls) {
  FetchResult result;
  std::ofstream journal(options_.journal, std::ios::app);
  if (!journal) throw IoError("cannot open journal " + options_.journal.string());
  bool first_request = true;
  for (const auto& url : urls) {
    if (done_.contains(url)) {
      result.skipped.push_back(url);
      continue;
    }
    if (!first_request) std::this_thread::sleep_for(options_.delay);
    first_request = false;

    const Url parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    auto response = client.Get(parts.path, {{"User-Agent", options_.user_agent}});
    if (!response || response->status != 200) {
      result.failed.push_back(url);
      continue;
    }
    write_file(options_.out_dir / file_name_for(url), response->body);
    journal << url << '\n' << std::flush;
    done_.insert(url);
    result.fetched.push_back(url);
  }
  return result;
}

}  // namespace hanmlm
