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

#include "hanmlm/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

#include <nlohmann/json.hpp>

#include "hanmlm/error.hpp"
#include "hanmlm/hangul.hpp"
#include "hanmlm/parallel.hpp"
#include "hanmlm/utf8.hpp"

namespace hanmlm::html {
namespace {

constexpr std::array<std::string_view, 14> kVoidTags = {
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param",
    "source", "track", "wbr"};
constexpr std::array<std::string_view, 2> kRawTextTags = {"script", "style"};
constexpr std::array<std::string_view, 22> kBlockTags = {
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "footer",
    "h1", "h2", "h3", "h4", "h5", "h6", "header", "li", "p", "section", "td", "tr"};

template <std::size_t N>
bool one_of(const std::array<std::string_view, N>& set, std::string_view s) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Attribute {
  std::string name;
  std::string value;
};

struct Tag {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::vector<Attribute> attributes;
};

// Parses the inside of <...>, i.e. without the angle brackets.
Tag parse_tag(std::string_view body) {
  Tag tag;
  std::size_t i = 0;
  const auto skip_space = [&] {
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
  };
  skip_space();
  if (i < body.size() && body[i] == '/') {
    tag.closing = true;
    ++i;
  }
  const std::size_t name_start = i;
  while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])) && body[i] != '/') ++i;
  tag.name = lower(body.substr(name_start, i - name_start));
  for (;;) {
    skip_space();
    if (i >= body.size()) break;
    if (body[i] == '/') {
      tag.self_closing = true;
      ++i;
      continue;
    }
    const std::size_t attr_start = i;
    while (i < body.size() && body[i] != '=' && body[i] != '/' &&
           !std::isspace(static_cast<unsigned char>(body[i]))) {
      ++i;
    }
    Attribute attr{lower(body.substr(attr_start, i - attr_start)), {}};
    skip_space();
    if (i < body.size() && body[i] == '=') {
      ++i;
      skip_space();
      if (i < body.size() && (body[i] == '"' || body[i] == '\'')) {
        const char quote = body[i++];
        const std::size_t end = body.find(quote, i);
        attr.value = std::string(body.substr(i, end - i));
        i = end == std::string_view::npos ? body.size() : end + 1;
      } else {
        const std::size_t value_start = i;
        while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        attr.value = std::string(body.substr(value_start, i - value_start));
      }
    }
    if (!attr.name.empty()) tag.attributes.push_back(std::move(attr));
  }
  return tag;
}

void collect_text(const Node& node, std::string& out) {
  if (node.is_text()) {
    out += node.text;
    return;
  }
  const bool block = one_of(kBlockTags, node.tag);
  if (block) out += ' ';
  for (const auto& child : node.children) collect_text(*child, out);
  if (block) out += ' ';
}

struct Compound {
  std::string tag;
  std::string id;
  std::vector<std::string> classes;
};

std::vector<Compound> parse_selector(std::string_view selector) {
  std::vector<Compound> parts;
  std::size_t i = 0;
  while (i < selector.size()) {
    while (i < selector.size() && std::isspace(static_cast<unsigned char>(selector[i]))) ++i;
    if (i >= selector.size()) break;
    Compound c;
    char kind = 't';
    std::string current;
    const auto commit = [&] {
      if (current.empty()) {
        if (kind != 't') throw InvalidArgument("malformed selector '" + std::string(selector) + "'");
        return;
      }
      if (kind == 't') c.tag = lower(current);
      if (kind == '#') c.id = current;
      if (kind == '.') c.classes.push_back(current);
      current.clear();
    };
    while (i < selector.size() && !std::isspace(static_cast<unsigned char>(selector[i]))) {
      const char ch = selector[i++];
      if (ch == '#' || ch == '.') {
        commit();
        kind = ch;
      } else {
        current.push_back(ch);
      }
    }
    commit();
    parts.push_back(std::move(c));
  }
  if (parts.empty()) throw InvalidArgument("empty selector");
  return parts;
}

bool matches(const Node& node, const Compound& c) {
  if (node.is_text()) return false;
  if (!c.tag.empty() && c.tag != "*" && node.tag != c.tag) return false;
  if (!c.id.empty() && node.id != c.id) return false;
  for (const auto& cls : c.classes) {
    if (std::find(node.classes.begin(), node.classes.end(), cls) == node.classes.end()) return false;
  }
  return true;
}

// Matches the selector right-to-left: the last compound against the node,
// earlier compounds against successive ancestors.
bool matches_chain(const Node& node, const std::vector<Compound>& parts) {
  if (!matches(node, parts.back())) return false;
  const Node* ancestor = node.parent;
  for (std::size_t k = parts.size() - 1; k-- > 0;) {
    while (ancestor != nullptr && !matches(*ancestor, parts[k])) ancestor = ancestor->parent;
    if (ancestor == nullptr) return false;
    ancestor = ancestor->parent;
  }
  return true;
}

void walk(const Node& node, const std::vector<Compound>& parts, std::vector<const Node*>& out) {
  for (const auto& child : node.children) {
    if (matches_chain(*child, parts)) out.push_back(child.get());
    walk(*child, parts, out);
  }
}

std::string clean(std::string_view text) { return utf8::normalize_space(hangul::normalize(text)); }

}  // namespace

std::string Node::text_content() const {
  std::string out;
  collect_text(*this, out);
  return out;
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    const std::size_t semi = text.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(text[i++]);
      continue;
    }
    const std::string_view name = text.substr(i + 1, semi - i - 1);
    std::optional<char32_t> cp;
    if (name == "amp") cp = U'&';
    else if (name == "lt") cp = U'<';
    else if (name == "gt") cp = U'>';
    else if (name == "quot") cp = U'"';
    else if (name == "apos") cp = U'\'';
    else if (name == "nbsp") cp = 0xA0;
    else if (name.size() > 1 && name[0] == '#') {
      try {
        const bool hex = name[1] == 'x' || name[1] == 'X';
        const unsigned long v = std::stoul(std::string(name.substr(hex ? 2 : 1)), nullptr, hex ? 16 : 10);
        if (v > 0 && v <= 0x10FFFF && (v < 0xD800 || v > 0xDFFF)) cp = static_cast<char32_t>(v);
      } catch (const std::exception&) {
      }
    }
    if (cp) {
      utf8::append(out, *cp);
      i = semi + 1;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

std::unique_ptr<Node> parse(std::string_view html) {
  auto root = std::make_unique<Node>();
  root->tag = "#document";
  Node* current = root.get();

  const auto add_text = [&](std::string_view raw) {
    if (raw.empty()) return;
    auto node = std::make_unique<Node>();
    node->text = decode_entities(raw);
    node->parent = current;
    current->children.push_back(std::move(node));
  };

  std::size_t i = 0;
  while (i < html.size()) {
    const std::size_t lt = html.find('<', i);
    if (lt == std::string_view::npos) {
      add_text(html.substr(i));
      break;
    }
    add_text(html.substr(i, lt - i));
    if (html.substr(lt, 4) == "<!--") {
      const std::size_t end = html.find("-->", lt + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    const std::size_t gt = html.find('>', lt);
    if (gt == std::string_view::npos) {
      add_text(html.substr(lt));
      break;
    }
    i = gt + 1;
    const std::string_view inner = html.substr(lt + 1, gt - lt - 1);
    if (inner.empty() || inner[0] == '!' || inner[0] == '?') continue;
    Tag tag = parse_tag(inner);
    if (tag.name.empty()) continue;

    if (tag.closing) {
      Node* n = current;
      while (n != nullptr && n->tag != tag.name) n = n->parent;
      if (n != nullptr && n != root.get()) current = n->parent;
      continue;
    }
    if (one_of(kRawTextTags, tag.name)) {
      const std::string close = "</" + tag.name;
      std::size_t end = i;
      for (;;) {
        end = html.find("</", end);
        if (end == std::string_view::npos || lower(html.substr(end, close.size())) == close) break;
        end += 2;
      }
      const std::size_t close_gt = end == std::string_view::npos ? end : html.find('>', end);
      i = close_gt == std::string_view::npos ? html.size() : close_gt + 1;
      continue;
    }
    // A new paragraph implicitly closes an open one.
    if (tag.name == "p" && current->tag == "p") current = current->parent;

    auto node = std::make_unique<Node>();
    node->tag = tag.name;
    for (const auto& a : tag.attributes) {
      if (a.name == "id") node->id = a.value;
      if (a.name == "class") {
        std::size_t s = 0;
        const std::string& v = a.value;
        while (s < v.size()) {
          while (s < v.size() && std::isspace(static_cast<unsigned char>(v[s]))) ++s;
          std::size_t e = s;
          while (e < v.size() && !std::isspace(static_cast<unsigned char>(v[e]))) ++e;
          if (e > s) node->classes.push_back(v.substr(s, e - s));
          s = e;
        }
      }
    }
    node->parent = current;
    Node* raw = node.get();
    current->children.push_back(std::move(node));
    if (!tag.self_closing && !one_of(kVoidTags, tag.name)) current = raw;
  }
  return root;
}

std::vector<const Node*> select(const Node& root, std::string_view selector) {
  const auto parts = parse_selector(selector);
  std::vector<const Node*> out;
  walk(root, parts, out);
  return out;
}

std::optional<std::string> parse_day(std::string_view text) {
  static const std::regex kDay(R"((\d{4})\)?\s*(?:[-./]|년)\s*(\d{1,2})\s*(?:[-./]|월)\s*(\d{1,2}))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(text.begin(), text.end(), m, kDay)) return std::nullopt;
  const int month = std::stoi(m[2].str());
  const int day = std::stoi(m[3].str());
  if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
  char buf[11];
  std::snprintf(buf, sizeof buf, "%s-%02d-%02d", m[1].str().c_str(), month, day);
  return std::string(buf);
}

ExtractionRules ExtractionRules::from_json(std::string_view text) {
  ExtractionRules rules;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("extraction config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("extraction config must be a JSON object");
  const auto get = [&](const char* key, std::string& field) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_string()) throw ParseError(std::string("extraction config: '") + key + "' must be a string");
      field = it->get<std::string>();
    }
  };
  get("title", rules.title);
  get("date", rules.date);
  get("body", rules.body);
  get("paragraph", rules.paragraph);
  std::string terminators;
  get("terminators", terminators);
  if (!terminators.empty()) rules.sentences.terminators = utf8::decode(terminators);
  std::string tag;
  get("source_tag", tag);
  if (!tag.empty()) {
    auto parsed = parse_source_tag(tag);
    if (!parsed) throw ParseError("extraction config: unknown source_tag '" + tag + "'");
    rules.source_tag = *parsed;
  }
  return rules;
}

Document extract_article(std::string_view html, const ExtractionRules& rules, std::string id) {
  if (html.empty()) throw InvalidArgument("empty HTML");
  if (auto bad = utf8::first_invalid(html)) {
    throw ParseError("HTML is not UTF-8 (byte " + std::to_string(*bad) + ")");
  }
  const auto root = parse(html);
  Document doc;
  doc.id = std::move(id);
  doc.source_tag = rules.source_tag;

  const auto titles = select(*root, rules.title);
  if (titles.empty()) throw ParseError("title not found");
  doc.title = clean(titles.front()->text_content());

  if (!rules.date.empty()) {
    const auto dates = select(*root, rules.date);
    if (dates.empty()) throw ParseError("date not found");
    doc.date = parse_day(dates.front()->text_content());
    if (!doc.date) throw ParseError("date not found in '" + clean(dates.front()->text_content()) + "'");
  }

  const auto bodies = select(*root, rules.body);
  if (bodies.empty()) throw ParseError("body not found");
  for (const Node* body : bodies) {
    std::vector<const Node*> paragraphs = select(*body, rules.paragraph);
    std::vector<std::string> texts;
    if (paragraphs.empty()) {
      texts.push_back(body->text_content());
    } else {
      for (const Node* p : paragraphs) texts.push_back(p->text_content());
    }
    for (const auto& t : texts) {
      for (auto& s : rules.sentences.split(clean(t))) doc.sentences.push_back(std::move(s));
    }
  }
  if (doc.sentences.empty()) throw ParseError("body not found (no text)");
  return doc;
}

DirectoryIngest ingest_html_dir(const std::filesystem::path& dir, const ExtractionRules& rules) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".html") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  struct Outcome {
    std::optional<Document> doc;
    std::string error;
  };
  std::vector<Outcome> outcomes(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    try {
      outcomes[i].doc = extract_article(read_file(files[i]), rules, files[i].stem().string());
    } catch (const Error& e) {
      outcomes[i].error = e.what();
    }
  });

  DirectoryIngest result;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (outcomes[i].doc) {
      result.corpus.add(std::move(*outcomes[i].doc));
    } else {
      result.report.issues.push_back({i + 1, files[i].filename().string() + ": " + outcomes[i].error});
      result.failed_files.push_back(files[i].string());
    }
  }
  return result;
}

}  // namespace hanmlm::html
