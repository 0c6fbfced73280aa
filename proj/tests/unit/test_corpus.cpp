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

#include <httplib.h>

#include <chrono>
#include <filesystem>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "hanmlm/corpus.hpp"
#include "hanmlm/error.hpp"
#include "hanmlm/fetcher.hpp"
#include "hanmlm/html.hpp"
#include "hanmlm/utf8.hpp"

using namespace hanmlm;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = HANMLM_FIXTURES;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hanmlm-unit-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Corpus numbered_corpus(std::size_t n) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) c.add({"doc-" + std::to_string(i), std::nullopt, "", {"문장 " + std::to_string(i)}, SourceTag::kOther});
  return c;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("two well formed lines") {
    const std::string text =
        R"({"id":"a","date":"2020-01-02","title":"제목","sentences":["하나.","둘."],"source_tag":"rodong"})" "\n"
        R"({"id":"b","date":null,"title":"","sentences":["셋."],"source_tag":"newyear"})" "\n";
    IngestReport report;
    const Corpus c = parse_jsonl(text, report);
    CHECK(report.clean());
    CHECK(c.document_count() == 2);
    CHECK(c.sentence_count() == 3);
    CHECK(c.documents()[0].date == "2020-01-02");
    CHECK(c.documents()[1].source_tag == SourceTag::kNewYear);
    IngestReport again;
    CHECK(parse_jsonl(serialize_jsonl(c), again) == c);
  }

  TEST_CASE("malformed line is reported and skipped") {
    const std::string text =
        R"({"id":"a","date":null,"title":"t","sentences":["x"],"source_tag":"other"})" "\n"
        R"({"id":"b","date":"yesterday","title":"t","sentences":["y"],"source_tag":"other"})" "\n"
        R"({"id":"c","date":null,"title":"t","sentences":["z"],"source_tag":"other"})" "\n";
    IngestReport report;
    const Corpus c = parse_jsonl(text, report);
    CHECK(c.document_count() == 2);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].line == 2);
  }

  TEST_CASE("other malformed records") {
    const std::vector<std::string> bad = {
        "{not json",
        R"({"id":"","title":"t","sentences":["x"],"source_tag":"other"})",
        R"({"id":"a","title":"t","sentences":[""],"source_tag":"other"})",
        R"({"id":"a","title":"t","sentences":"x","source_tag":"other"})",
        R"({"id":"a","title":"t","sentences":["x"],"source_tag":"blog"})",
        "[1,2]",
        std::string("{\"id\":\"\xff\"}"),
    };
    for (const auto& line : bad) {
      IngestReport report;
      CAPTURE(line);
      CHECK(parse_jsonl(line, report).document_count() == 0);
      CHECK(report.issues.size() == 1);
    }
    IngestReport report;
    const std::string dup = R"({"id":"a","title":"t","sentences":["x"],"source_tag":"other"})";
    CHECK(parse_jsonl(dup + "\n" + dup + "\n", report).document_count() == 1);
    CHECK(report.issues.size() == 1);
  }

  TEST_CASE("jamo input is composed on ingest") {
    IngestReport report;
    const Corpus c = parse_jsonl("{\"id\":\"a\",\"title\":\"\",\"sentences\":[\"\xE1\x84\x92\xE1\x85\xA1\xE1\x86\xAB\"],\"source_tag\":\"other\"}", report);
    REQUIRE(c.sentence_count() == 1);
    CHECK(c.documents()[0].sentences[0] == "한");
  }

  TEST_CASE("split is a deterministic partition") {
    const Corpus c = numbered_corpus(500);
    const auto [train, valid] = split_corpus(c, 0.8, 17);
    std::set<std::string> ids;
    for (const auto& d : train.documents()) ids.insert(d.id);
    for (const auto& d : valid.documents()) CHECK(ids.insert(d.id).second);
    CHECK(ids.size() == c.document_count());
    const auto [train2, valid2] = split_corpus(c, 0.8, 17);
    CHECK(train == train2);
    CHECK(valid == valid2);
    CHECK_THROWS_AS(split_corpus(c, 1.0, 1), Error);
  }

  TEST_CASE("split share is near the fraction") {
    const auto [train, valid] = split_corpus(numbered_corpus(10000), 0.8, 2024);
    const double share = static_cast<double>(train.document_count()) / 10000.0;
    CHECK(share > 0.78);
    CHECK(share < 0.82);
  }

  TEST_CASE("sentence rule") {
    const SentenceRule rule;
    CHECK(rule.split("하나. 둘! 셋? 넷") == std::vector<std::string>{"하나.", "둘!", "셋?", "넷"});
    CHECK(rule.split("3.14는 수이다.") == std::vector<std::string>{"3.14는 수이다."});
    CHECK(rule.split("   ").empty());
  }

  TEST_CASE("nli records") {
    const std::string tsv =
        "premise\thypothesis\tlabel\tsplit\n"
        "P.\tH.\tentailment\tdev\n"
        "전제 문장.\t가설.\tneutral\ttest\n"
        "only one column\n"
        "a\tb\tc\tvalidation\n"
        "x.\ty.\tcontradiction\ttest\n";
    IngestReport report;
    const auto records = parse_nli_tsv(tsv, report);
    REQUIRE(records.size() == 3);
    CHECK(report.issues.size() == 2);
    const auto sentences = nli_to_sentences(records);
    CHECK(sentences[0] == "P. H.");
    CHECK(sentences[1] == "전제 문장. 가설.");
    const Corpus c = nli_to_corpus(records);
    CHECK(c.document_count() == 3);
    CHECK(c.documents()[2].id == "nli-test-1");
    CHECK(c.documents()[0].source_tag == SourceTag::kNli);
    CHECK_THROWS_AS(parse_nli_tsv("a\tb\n", report), Error);
  }
}

TEST_SUITE("html") {
  const html::ExtractionRules rules = html::ExtractionRules::from_json(read_file(kFixtures / "rules.json"));

  TEST_CASE("fixture article") {
    const Document d = html::extract_article(read_file(kFixtures / "html" / "article1.html"), rules, "article1");
    CHECK(d.title == "새 학교가 문을 열었다");
    CHECK(d.date == "2023-04-05");
    CHECK(d.source_tag == SourceTag::kRodong);
    // Hand count: 2 + 1 + 2 sentences; whitespace-only and empty paragraphs drop out.
    REQUIRE(d.sentences.size() == 5);
    CHECK(d.sentences[0] == "평양에 새 학교가 문을 열었다.");
    CHECK(d.sentences[2] == "선생님들은 \"좋은 날\"이라고 말하였다.");
    CHECK(d.sentences[4] == "모두 새 건물이다.");
    for (const auto& s : d.sentences) CHECK_FALSE(s.empty());
  }

  TEST_CASE("line breaks separate text") {
    const Document d = html::extract_article(read_file(kFixtures / "html" / "article2.html"), rules, "article2");
    CHECK(d.date == "2021-12-01");
    CHECK(d.sentences == std::vector<std::string>{"마을에서 돐잔치가 열렸다.", "모두 모였다."});
  }

  TEST_CASE("missing body") {
    CHECK_THROWS_WITH_AS(html::extract_article(read_file(kFixtures / "html" / "no_body.html"), rules, "x"),
                         "body not found", Error);
  }

  TEST_CASE("directory ingest reports failures") {
    const auto result = html::ingest_html_dir(kFixtures / "html", rules);
    CHECK(result.corpus.document_count() == 2);
    CHECK(result.corpus.sentence_count() == 7);
    REQUIRE(result.failed_files.size() == 1);
    CHECK(fs::path(result.failed_files[0]).filename() == "no_body.html");
  }

  TEST_CASE("dates and selectors") {
    CHECK(html::parse_day("2019년 1월 1일") == "2019-01-01");
    CHECK(html::parse_day("주체108(2019)년 10월 9일") == "2019-10-09");
    CHECK_FALSE(html::parse_day("어제").has_value());
    const auto root = html::parse("<div id=\"m\"><p class=\"a b\">x &amp; y</p><p>z</p></div>");
    CHECK(html::select(*root, "p").size() == 2);
    CHECK(html::select(*root, "#m p.b").size() == 1);
    CHECK(utf8::normalize_space(html::select(*root, "p.b")[0]->text_content()) == "x & y");
    CHECK_THROWS_AS(html::ExtractionRules::from_json("{\"body\": 3}"), Error);
  }
}

TEST_SUITE("fetcher") {
  TEST_CASE("fetches, journals and skips") {
    httplib::Server server;
    int hits = 0;
    server.Get("/article/1", [&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.set_content("<html>1</html>", "text/html");
    });
    server.Get("/article/2", [&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.set_content("<html>2</html>", "text/html");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const fs::path dir = scratch_dir("fetch");
    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    FetchOptions options;
    options.delay = std::chrono::milliseconds(50);
    options.out_dir = dir;
    options.timeout = std::chrono::seconds(5);
    {
      ArticleFetcher fetcher(options);
      const auto r = fetcher.fetch({base + "/article/1", base + "/missing", base + "/article/2"});
      CHECK(r.fetched.size() == 2);
      CHECK(r.failed == std::vector<std::string>{base + "/missing"});
      CHECK(read_file(dir / ArticleFetcher::file_name_for(base + "/article/1")) == "<html>1</html>");
    }
    {
      ArticleFetcher resumed(options);
      const auto r = resumed.fetch({base + "/article/1", base + "/article/2"});
      CHECK(r.skipped.size() == 2);
      CHECK(r.fetched.empty());
    }
    CHECK(hits == 2);
    server.stop();
    thread.join();
    CHECK(ArticleFetcher::file_name_for("http://h/a/b.html?x=1") == "a_b_html_x_1.html");
    CHECK_THROWS_AS(ArticleFetcher::file_name_for("https://h/a"), Error);
  }
}
