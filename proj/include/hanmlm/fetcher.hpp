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

#include <chrono>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace hanmlm {

struct FetchOptions {
  std::chrono::milliseconds delay{2000};  // between requests to the same host
  std::filesystem::path out_dir;
  std::filesystem::path journal;  // one fetched URL per line; defaults to out_dir/journal.txt
  std::string user_agent = "hanmlm-fetcher/1.0";
  std::chrono::seconds timeout{30};
};

struct FetchResult {
  std::vector<std::string> fetched;
  std::vector<std::string> skipped;  // already in the journal
  std::vector<std::string> failed;
};

// Sequential plain-HTTP downloader for article pages. Each page is
// saved as <out_dir>/<sanitized-path>.html and recorded in the journal,
// so an interrupted crawl resumes where it stopped.
class ArticleFetcher {
 public:
  explicit ArticleFetcher(FetchOptions options);

  FetchResult fetch(const std::vector<std::string>& urls);

  // File name a URL is stored under.
  static std::string file_name_for(const std::string& url);

 private:
  FetchOptions options_;
  std::set<std::string> done_;
};

}  // namespace hanmlm
