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

#include "hanmlm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hanmlm/error.hpp"
#include "hanmlm/parallel.hpp"

namespace hanmlm {
namespace {

using json = nlohmann::ordered_json;

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  // Width counts bytes; report names are expected to be ASCII.
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string lambda_label(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lambda);
  return buf;
}

json repeat_json(const RepeatScore& r) {
  json j;
  j["seed"] = r.seed;
  j["log_perplexity"] = r.log_perplexity;
  j["accuracy"] = r.accuracy;
  j["masked_tokens"] = r.masked_tokens;
  j["sentences"] = r.sentences;
  return j;
}

json model_json(const ModelScore& m) {
  json j;
  j["model"] = m.model;
  j["vocab_size"] = m.vocab_size;
  j["datasets"] = json::array();
  for (const auto& d : m.datasets) {
    json dj;
    dj["dataset"] = d.dataset;
    dj["log_perplexity"] = d.log_perplexity;
    dj["accuracy"] = d.accuracy;
    dj["repeats"] = json::array();
    for (const auto& r : d.repeats) dj["repeats"].push_back(repeat_json(r));
    j["datasets"].push_back(std::move(dj));
  }
  j["average_log_perplexity"] = m.average_log_perplexity;
  j["average_accuracy"] = m.average_accuracy;
  return j;
}

ModelScore model_from_json(const json& j) {
  ModelScore m;
  m.model = j.at("model").get<std::string>();
  m.vocab_size = j.at("vocab_size").get<std::size_t>();
  for (const auto& dj : j.at("datasets")) {
    DatasetScore d;
    d.dataset = dj.at("dataset").get<std::string>();
    d.log_perplexity = dj.at("log_perplexity").get<double>();
    d.accuracy = dj.at("accuracy").get<double>();
    for (const auto& rj : dj.at("repeats")) {
      RepeatScore r;
      r.seed = rj.at("seed").get<std::uint64_t>();
      r.log_perplexity = rj.at("log_perplexity").get<double>();
      r.accuracy = rj.at("accuracy").get<double>();
      r.masked_tokens = rj.at("masked_tokens").get<std::size_t>();
      r.sentences = rj.at("sentences").get<std::size_t>();
      d.repeats.push_back(r);
    }
    m.datasets.push_back(std::move(d));
  }
  m.average_log_perplexity = j.at("average_log_perplexity").get<double>();
  m.average_accuracy = j.at("average_accuracy").get<double>();
  return m;
}

std::string normalization_name(Normalization n) {
  return n == Normalization::kPerToken ? "per-token" : "per-sentence";
}

std::string header_line(const EvalConfig& c) {
  std::string seeds;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(c.seeds[i]);
  return "# log-perplexity: natural log, " + normalization_name(c.normalization) +
         "; accuracy: % of masked tokens; repeats " + std::to_string(c.repeats) + " (seeds " + seeds +
         "); mask probability " + lambda_label(c.mask_probability) + "\n";
}

}  // namespace

void EvalConfig::validate() const {
  if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  if (seeds.size() != repeats) {
    throw InvalidArgument("expected " + std::to_string(repeats) + " seeds, got " + std::to_string(seeds.size()));
  }
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw InvalidArgument("evaluation seeds must be distinct");
  }
  if (!(mask_probability > 0.0 && mask_probability < 1.0)) {
    throw InvalidArgument("mask_probability must be in (0, 1)");
  }
}

std::string EvalConfig::to_json() const {
  json j;
  j["repeats"] = repeats;
  j["mask_probability"] = mask_probability;
  j["seeds"] = seeds;
  j["normalization"] = normalization_name(normalization);
  j["log_base"] = "e";
  return j.dump();
}

EvalConfig EvalConfig::from_json(std::string_view text) { return from_json(text, EvalConfig{}); }

EvalConfig EvalConfig::from_json(std::string_view text, EvalConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("eval config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("eval config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "repeats") c.repeats = value.get<std::size_t>();
      else if (key == "mask_probability") c.mask_probability = value.get<double>();
      else if (key == "seeds") c.seeds = value.get<std::vector<std::uint64_t>>();
      else if (key == "normalization") {
        const auto s = value.get<std::string>();
        if (s == "per-token") c.normalization = Normalization::kPerToken;
        else if (s == "per-sentence") c.normalization = Normalization::kPerSentence;
        else throw ParseError("eval config: unknown normalization '" + s + "'");
      } else if (key == "log_base") {
        if (value.get<std::string>() != "e") throw ParseError("eval config: only natural log is supported");
      } else {
        throw ParseError("eval config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("eval config: ") + e.what());
  }
  return c;
}

MaskedDataset prepare_dataset(std::string name, std::span<const EncodedSequence> sentences,
                              const EvalConfig& config) {
  config.validate();
  MaskedDataset data;
  data.name = std::move(name);
  data.seeds = config.seeds;
  for (std::uint64_t seed : config.seeds) {
    std::vector<MaskedSequence> masked;
    masked.reserve(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      Rng rng(derive_seed(seed, i));
      MaskedSequence m = mask_sentence(sentences[i], config.mask_probability, MaskingScheme::kMaskOnly,
                                       0, rng);
      if (!m.mask_positions.empty()) masked.push_back(std::move(m));
    }
    data.repeats.push_back(std::move(masked));
  }
  return data;
}

RepeatScore score_repeat(const ModelParams& params, std::span<const MaskedSequence> sentences,
                         Normalization normalization) {
  if (sentences.empty()) throw InvalidArgument("empty corpus");
  RepeatScore score;
  double nll = 0.0;
  std::size_t correct = 0;
  for (const auto& seq : sentences) {
    const ForwardOutput out = forward(params, seq.view(), Mode::kEval);
    for (std::size_t k = 0; k < seq.mask_positions.size(); ++k) {
      const auto row = out.logits.row(static_cast<Eigen::Index>(seq.mask_positions[k]));
      const double mx = row.maxCoeff();
      const double lse = mx + std::log((row.array() - mx).exp().sum());
      nll += lse - row(seq.targets[k]);
      Eigen::Index best = 0;
      row.maxCoeff(&best);
      if (best == seq.targets[k]) ++correct;
    }
    score.masked_tokens += seq.mask_positions.size();
  }
  score.sentences = sentences.size();
  const double denom = normalization == Normalization::kPerToken
                           ? static_cast<double>(score.masked_tokens)
                           : static_cast<double>(score.sentences);
  score.log_perplexity = nll / denom;
  score.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(score.masked_tokens);
  return score;
}

std::vector<double> log_perplexity(const ModelParams& params, const MaskedDataset& data,
                                   Normalization normalization) {
  std::vector<double> out;
  for (const auto& r : data.repeats) out.push_back(score_repeat(params, r, normalization).log_perplexity);
  return out;
}

std::vector<double> mlm_accuracy(const ModelParams& params, const MaskedDataset& data) {
  std::vector<double> out;
  for (const auto& r : data.repeats) out.push_back(score_repeat(params, r, Normalization::kPerToken).accuracy);
  return out;
}

double representation_stray(const ModelParams& current, const ModelParams& base,
                            std::span<const EncodedSequence> sentences, std::size_t layer) {
  if (current.config.vocab_size != base.config.vocab_size) {
    throw InvalidArgument("vocab mismatch: " + std::to_string(current.config.vocab_size) + " vs " +
                          std::to_string(base.config.vocab_size));
  }
  const std::size_t l = resolve_layer(current.config, layer);
  if (l > base.config.num_layers) throw InvalidArgument("base model has fewer layers");
  if (sentences.empty()) throw InvalidArgument("empty corpus");
  double sum = 0.0;
  for (const auto& s : sentences) {
    const MaskedSequence seq = unmasked(s);
    const ForwardOutput a = forward(current, seq.view(), Mode::kEval);
    const ForwardOutput b = forward(base, seq.view(), Mode::kEval);
    sum += cross_lingual_penalty(a.representation(l), b.representation(l), seq);
  }
  return sum / static_cast<double>(sentences.size());
}

namespace {

DatasetScore summarize(const std::string& name, std::vector<RepeatScore> repeats) {
  DatasetScore d;
  d.dataset = name;
  for (const auto& r : repeats) {
    d.log_perplexity += r.log_perplexity;
    d.accuracy += r.accuracy;
  }
  d.log_perplexity /= static_cast<double>(repeats.size());
  d.accuracy /= static_cast<double>(repeats.size());
  d.repeats = std::move(repeats);
  return d;
}

void fill_averages(ModelScore& m) {
  m.average_log_perplexity = 0.0;
  m.average_accuracy = 0.0;
  for (const auto& d : m.datasets) {
    m.average_log_perplexity += d.log_perplexity;
    m.average_accuracy += d.accuracy;
  }
  if (!m.datasets.empty()) {
    m.average_log_perplexity /= static_cast<double>(m.datasets.size());
    m.average_accuracy /= static_cast<double>(m.datasets.size());
  }
}

}  // namespace

ModelScore evaluate_model(const std::string& name, const ModelParams& params,
                          std::span<const MaskedDataset> datasets) {
  const NamedModel model{name, &params};
  EvalConfig config;
  if (!datasets.empty()) {
    config.seeds = datasets.front().seeds;
    config.repeats = config.seeds.size();
  }
  return evaluate(std::span(&model, 1), datasets, config).models.front();
}

EvalReport evaluate(std::span<const NamedModel> models, std::span<const MaskedDataset> datasets,
                    const EvalConfig& config) {
  config.validate();
  for (const auto& d : datasets) {
    if (d.seeds != config.seeds) throw InvalidArgument("dataset " + d.name + " was masked with other seeds");
  }
  EvalReport report;
  report.config = config;
  const std::size_t R = config.repeats;
  const std::size_t cells = models.size() * datasets.size() * R;
  std::vector<RepeatScore> scores(cells);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t m = cell / (datasets.size() * R);
    const std::size_t d = (cell / R) % datasets.size();
    const std::size_t r = cell % R;
    scores[cell] = score_repeat(*models[m].params, datasets[d].repeats[r], config.normalization);
    scores[cell].seed = config.seeds[r];
  });
  for (std::size_t m = 0; m < models.size(); ++m) {
    ModelScore ms;
    ms.model = models[m].name;
    ms.vocab_size = models[m].params->config.vocab_size;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      const auto first = scores.begin() + static_cast<std::ptrdiff_t>((m * datasets.size() + d) * R);
      ms.datasets.push_back(summarize(datasets[d].name, {first, first + static_cast<std::ptrdiff_t>(R)}));
    }
    fill_averages(ms);
    report.models.push_back(std::move(ms));
  }
  return report;
}

std::string EvalReport::to_json() const {
  json j;
  j["config"] = json::parse(config.to_json());
  j["models"] = json::array();
  for (const auto& m : models) j["models"].push_back(model_json(m));
  return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    EvalReport r;
    r.config = EvalConfig::from_json(j.at("config").dump());
    for (const auto& m : j.at("models")) r.models.push_back(model_from_json(m));
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("eval report: ") + e.what());
  }
}

std::string EvalReport::to_table() const {
  std::size_t name_w = 5, data_w = 7;
  for (const auto& m : models) {
    name_w = std::max(name_w, m.model.size());
    for (const auto& d : m.datasets) data_w = std::max(data_w, d.dataset.size());
  }
  name_w += 2;
  data_w += 2;
  std::string out = header_line(config);
  out += pad("model", name_w) + pad("vocab", 8) + pad("dataset", data_w) + pad("perplexity", 12) + "accuracy\n";
  for (const auto& m : models) {
    for (const auto& d : m.datasets) {
      out += pad(m.model, name_w) + pad(std::to_string(m.vocab_size), 8) + pad(d.dataset, data_w) +
             pad(fixed(d.log_perplexity), 12) + fixed(d.accuracy) + "\n";
    }
    out += pad(m.model, name_w) + pad(std::to_string(m.vocab_size), 8) + pad("Average", data_w) +
           pad(fixed(m.average_log_perplexity), 12) + fixed(m.average_accuracy) + "\n";
  }
  return out;
}

std::string EvalReport::to_csv() const {
  const auto num = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  std::string out = "model,dataset,perplexity,accuracy,repeat\n";
  for (const auto& m : models) {
    for (const auto& d : m.datasets) {
      for (std::size_t r = 0; r < d.repeats.size(); ++r) {
        out += m.model + "," + d.dataset + "," + num(d.repeats[r].log_perplexity) + "," +
               num(d.repeats[r].accuracy) + "," + std::to_string(r + 1) + "\n";
      }
      out += m.model + "," + d.dataset + "," + num(d.log_perplexity) + "," + num(d.accuracy) + ",mean\n";
    }
  }
  return out;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "table-text" || text == "table" || text == "text") return ReportFormat::kTable;
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv") return ReportFormat::kCsv;
  throw InvalidArgument("unknown report format '" + std::string(text) + "'");
}

std::string curves_to_csv(std::span<const CurvePoint> points) {
  std::string out = "step,series,value\n";
  for (const auto& p : points) {
    std::ostringstream s;
    s.precision(17);
    s << p.step << ',' << p.series << ',' << p.value << '\n';
    out += s.str();
  }
  return out;
}

std::string curves_to_svg(std::span<const CurvePoint> points, std::string_view title) {
  constexpr double kW = 860, kH = 480, kLeft = 70, kRight = 220, kTop = 40, kBottom = 50;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& p : points) {
    const double x = static_cast<double>(p.step);
    series[p.series].push_back({x, p.value});
    if (first) {
      xmin = xmax = x;
      ymin = ymax = p.value;
      first = false;
    }
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, p.value);
    ymax = std::max(ymax, p.value);
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  const auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  const auto sy = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << fixed(yv)
        << "</text>\n";
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
        << fixed(xv, 0) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">step</text>\n";
  std::size_t k = 0;
  for (const auto& [name, pts] : series) {
    const char* color = kColors[k % 10];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) svg << sx(x) << ',' << sy(y) << ' ';
    svg << "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(k);
    svg << "<line x1=\"" << kW - kRight + 10 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 30
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kW - kRight + 35 << "\" y=\"" << ly + 4 << "\">" << name << "</text>\n";
    ++k;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<double> parse_lambda_grid(std::string_view text) {
  std::vector<double> out;
  const auto to_double = [&](std::string_view s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(s), &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument("bad lambda value '" + std::string(s) + "'");
    }
  };
  if (text.find(':') != std::string_view::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    if (b == std::string_view::npos) throw InvalidArgument("lambda range must be start:stop:step");
    const double start = to_double(text.substr(0, a));
    const double stop = to_double(text.substr(a + 1, b - a - 1));
    const double step = to_double(text.substr(b + 1));
    if (!(step > 0.0) || stop < start) throw InvalidArgument("lambda range must have step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto comma = text.find(',', start);
      if (comma == std::string_view::npos) comma = text.size();
      out.push_back(to_double(text.substr(start, comma - start)));
      start = comma + 1;
    }
  }
  for (double l : out) {
    if (!(l >= 0.0)) throw InvalidArgument("lambda values must be >= 0");
  }
  return out;
}

std::optional<std::size_t> SweepReport::best_perplexity_row() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].score) continue;
    if (!best || rows[i].score->average_log_perplexity < rows[*best].score->average_log_perplexity) best = i;
  }
  return best;
}

std::optional<std::size_t> SweepReport::best_accuracy_row() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].score) continue;
    if (!best || rows[i].score->average_accuracy > rows[*best].score->average_accuracy) best = i;
  }
  return best;
}

std::string SweepReport::to_json() const {
  json j;
  j["eval_config"] = json::parse(eval_config.to_json());
  j["train_config"] = json::parse(train_config_json.empty() ? "{}" : train_config_json);
  j["datasets"] = datasets;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    json rj;
    rj["lambda"] = r.lambda;
    rj["error"] = r.error.empty() ? json(nullptr) : json(r.error);
    rj["final_cross_lingual_l2"] = r.final_cross_lingual_l2;
    rj["final_stray"] = r.final_stray;
    rj["score"] = r.score ? model_json(*r.score) : json(nullptr);
    j["rows"].push_back(std::move(rj));
  }
  const auto bp = best_perplexity_row();
  const auto ba = best_accuracy_row();
  j["best_perplexity_row"] = bp ? json(*bp) : json(nullptr);
  j["best_accuracy_row"] = ba ? json(*ba) : json(nullptr);
  j["curves"] = json::array();
  for (const auto& p : curves) j["curves"].push_back({{"step", p.step}, {"series", p.series}, {"value", p.value}});
  return j.dump(2) + "\n";
}

SweepReport SweepReport::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    SweepReport r;
    r.eval_config = EvalConfig::from_json(j.at("eval_config").dump());
    r.train_config_json = j.at("train_config").dump();
    r.datasets = j.at("datasets").get<std::vector<std::string>>();
    for (const auto& rj : j.at("rows")) {
      SweepRow row;
      row.lambda = rj.at("lambda").get<double>();
      if (!rj.at("error").is_null()) row.error = rj.at("error").get<std::string>();
      row.final_cross_lingual_l2 = rj.at("final_cross_lingual_l2").get<double>();
      row.final_stray = rj.at("final_stray").get<double>();
      if (!rj.at("score").is_null()) row.score = model_from_json(rj.at("score"));
      r.rows.push_back(std::move(row));
    }
    for (const auto& p : j.at("curves")) {
      r.curves.push_back({p.at("step").get<std::size_t>(), p.at("series").get<std::string>(),
                          p.at("value").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("sweep report: ") + e.what());
  }
}

std::string SweepReport::to_table() const {
  const auto bp = best_perplexity_row();
  const auto ba = best_accuracy_row();
  std::string out = header_line(eval_config);
  out += "# * marks the best average\n";
  std::string h1 = pad("", 8), h2 = pad("lambda", 8);
  for (const auto& d : datasets) {
    h1 += pad(d, 24);
    h2 += pad("Perplexity", 12) + pad("Accuracy", 12);
  }
  h1 += "Average";
  h2 += pad("Perplexity", 12) + "Accuracy";
  out += h1 + "\n" + h2 + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string line = pad(lambda_label(r.lambda), 8);
    if (!r.score) {
      out += line + "failed: " + r.error + "\n";
      continue;
    }
    for (const auto& d : r.score->datasets) line += pad(fixed(d.log_perplexity), 12) + pad(fixed(d.accuracy), 12);
    line += pad(fixed(r.score->average_log_perplexity) + (bp == i ? "*" : ""), 12);
    line += fixed(r.score->average_accuracy) + (ba == i ? "*" : "");
    out += line + "\n";
  }
  return out;
}

std::string SweepReport::to_csv() const {
  std::string out = "lambda,dataset,perplexity,accuracy\n";
  const auto num = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  for (const auto& r : rows) {
    if (!r.score) continue;
    for (const auto& d : r.score->datasets) {
      out += num(r.lambda) + "," + d.dataset + "," + num(d.log_perplexity) + "," + num(d.accuracy) + "\n";
    }
    out += num(r.lambda) + ",Average," + num(r.score->average_log_perplexity) + "," +
           num(r.score->average_accuracy) + "\n";
  }
  return out;
}

SweepReport sweep_lambda(std::span<const double> lambdas, const ModelParams& base,
                         std::span<const EncodedSequence> train_data,
                         std::span<const MaskedDataset> datasets, const TrainConfig& train_config,
                         const EvalConfig& eval_config, const SweepOptions& options) {
  eval_config.validate();
  SweepReport report;
  report.eval_config = eval_config;
  report.train_config_json = train_config.to_json();
  for (const auto& d : datasets) report.datasets.push_back(d.name);

  const std::size_t stray_sentences = std::min<std::size_t>(train_data.size(), 500);
  for (double lambda : lambdas) {
    SweepRow row;
    row.lambda = lambda;
    const std::string label = "lambda=" + lambda_label(lambda);
    if (options.progress) options.progress("training " + label);
    try {
      if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
      TrainConfig cfg = train_config;
      cfg.lambda = lambda;
      std::size_t last_step = 0;
      TrainCallbacks callbacks;
      callbacks.on_record = [&](const TrainRecord& r) {
        last_step = r.step;
        report.curves.push_back({r.step, label + "/cross_lingual_l2", r.cross_lingual_l2});
      };
      if (options.record_curves) {
        callbacks.on_epoch_end = [&](std::size_t, const ModelParams& params) {
          for (const auto& d : datasets) {
            const RepeatScore s = score_repeat(params, d.repeats.front(), eval_config.normalization);
            report.curves.push_back({last_step, label + "/" + d.name + "/accuracy", s.accuracy});
            report.curves.push_back({last_step, label + "/" + d.name + "/log_perplexity", s.log_perplexity});
          }
        };
      }
      TrainResult trained = train(train_data, base, cfg, callbacks);
      row.score = evaluate_model(label, trained.params, datasets);
      row.final_cross_lingual_l2 = trained.log.empty() ? 0.0 : trained.log.back().cross_lingual_l2;
      if (stray_sentences > 0) {
        row.final_stray = representation_stray(trained.params, base, train_data.first(stray_sentences),
                                               train_config.representation_layer);
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace hanmlm
