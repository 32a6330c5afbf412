#include "docdec/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace docdec {

using nlohmann::json;

MetricSelection MetricSelection::parse(std::span<const std::string> names) {
  MetricSelection sel{false, false, false, false, false};
  for (const std::string& n : names) {
    if (n == "ppl") sel.ppl = true;
    else if (n == "bleu") sel.bleu = true;
    else if (n == "gender") sel.gender = true;
    else if (n == "formality") sel.formality = true;
    else if (n == "contrastive") sel.contrastive = true;
    else throw Error("unknown metric '" + n + "'");
  }
  return sel;
}

namespace {

json params_to_json(const RunParams& p) {
  return {{"window", p.decode.window},
          {"beam", p.decode.beam.beam_size},
          {"context_beam", p.decode.context_beam},
          {"length_norm", p.decode.beam.length_norm},
          {"max_len", p.decode.beam.max_len ? json(*p.decode.beam.max_len) : json(nullptr)},
          {"epsilon", p.epsilon},
          {"seed", p.seed}};
}

RunParams params_from_json(const json& j, StrategyId strategy) {
  RunParams p;
  p.strategy = strategy;
  p.decode.window = j.at("window").get<std::size_t>();
  p.decode.beam.beam_size = j.at("beam").get<std::size_t>();
  p.decode.context_beam = j.at("context_beam").get<std::size_t>();
  p.decode.beam.length_norm = j.at("length_norm").get<bool>();
  if (!j.at("max_len").is_null()) p.decode.beam.max_len = j.at("max_len").get<std::size_t>();
  p.epsilon = j.at("epsilon").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

// JSON has no infinities; zero-probability scores are stored as null.
json logprob_to_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double logprob_from_json(const json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

json report_to_json(const RunReport& report) {
  json docs = json::array();
  for (std::size_t d = 0; d < report.results.size(); ++d) {
    const DecodeResult& r = report.results[d];
    json sentences = json::array();
    for (const Hypothesis& h : r.per_sentence) {
      json token_logprobs = json::array();
      for (double l : h.token_logprobs) token_logprobs.push_back(logprob_to_json(l));
      sentences.push_back({{"tokens", h.tokens},
                           {"logprob", logprob_to_json(h.total_logprob)},
                           {"token_logprobs", std::move(token_logprobs)}});
    }
    json diags = json::array();
    for (const Diagnostic& diag : r.diagnostics) {
      diags.push_back({{"sentence", diag.sentence_index}, {"kind", to_string(diag.kind)}});
    }
    docs.push_back({{"doc_id", report.doc_ids.at(d)},
                    {"forward_passes", r.forward_passes},
                    {"score", logprob_to_json(r.score)},
                    {"diagnostics", std::move(diags)},
                    {"sentences", std::move(sentences)}});
  }
  return {{"strategy", to_string(report.params.strategy)},
          {"params", params_to_json(report.params)},
          {"documents", std::move(docs)},
          {"metrics", report.metrics},
          {"forward_passes", report.forward_passes},
          {"wall_time_s", report.wall_time_s}};
}

RunReport report_from_json(const json& j) {
  RunReport report;
  try {
    const StrategyId strategy = parse_strategy(j.at("strategy").get<std::string>());
    report.params = params_from_json(j.at("params"), strategy);
    for (const json& doc : j.at("documents")) {
      report.doc_ids.push_back(doc.at("doc_id").get<std::string>());
      DecodeResult r;
      r.forward_passes = doc.at("forward_passes").get<std::uint64_t>();
      r.score = logprob_from_json(doc.at("score"));
      for (const json& diag : doc.at("diagnostics")) {
        const std::string kind = diag.at("kind").get<std::string>();
        DiagnosticKind k = DiagnosticKind::kSeparatorDeficit;
        if (kind == to_string(DiagnosticKind::kSeparatorSurplus)) {
          k = DiagnosticKind::kSeparatorSurplus;
        } else if (kind != to_string(DiagnosticKind::kSeparatorDeficit)) {
          throw Error("unknown diagnostic kind '" + kind + "'");
        }
        r.diagnostics.push_back({diag.at("sentence").get<std::size_t>(), k});
      }
      for (const json& s : doc.at("sentences")) {
        Hypothesis h;
        h.tokens = s.at("tokens").get<Tokens>();
        h.total_logprob = logprob_from_json(s.at("logprob"));
        for (const json& l : s.at("token_logprobs")) h.token_logprobs.push_back(logprob_from_json(l));
        r.per_sentence.push_back(std::move(h));
      }
      report.results.push_back(std::move(r));
    }
    report.metrics = j.value("metrics", json(nullptr));
    report.forward_passes = j.at("forward_passes").get<std::uint64_t>();
    report.wall_time_s = j.value("wall_time_s", 0.0);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed run report: ") + e.what());
  }
  return report;
}

DocumentTargets report_targets(const RunReport& report) {
  DocumentTargets targets;
  for (const DecodeResult& r : report.results) {
    std::vector<Tokens>& doc = targets.emplace_back();
    for (const Hypothesis& h : r.per_sentence) doc.push_back(h.tokens);
  }
  return targets;
}

json f1_to_json(const F1Report& report) {
  json classes = json::object();
  for (const auto& [cls, c] : report.per_class) {
    classes[cls] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                    {"support", c.support},     {"tp", c.tp},         {"fp", c.fp},
                    {"fn", c.fn}};
  }
  return {{"micro_f1", report.micro_f1},
          {"macro_f1", report.macro_f1},
          {"macro_classes", report.macro_classes},
          {"instances", report.instances},
          {"per_class", std::move(classes)}};
}

json compute_metrics(const ScorerContract& scorer, const WorldSpec& world, const Corpus& corpus,
                     const DocumentTargets& hypotheses, std::size_t window,
                     const MetricSelection& selection,
                     std::span<const ContrastiveItem> contrastive) {
  if (hypotheses.size() != corpus.size()) {
    throw Error("report has " + std::to_string(hypotheses.size()) + " documents, corpus has " +
                std::to_string(corpus.size()));
  }
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (hypotheses[d].size() != corpus[d].sentences.size()) {
      throw Error("sentence count mismatch in document '" + corpus[d].doc_id + "'");
    }
  }
  const bool refs = std::all_of(corpus.begin(), corpus.end(),
                                [](const Document& d) { return d.has_references(); });
  if (selection.needs_references() && !refs) {
    throw Error("bleu, gender and formality metrics need references in the corpus");
  }
  json m = json::object();
  if (selection.ppl) {
    m["ppl"] = perplexity(scorer, corpus, hypotheses, Conditioning::kOwnContext, window);
  }
  if (selection.bleu) {
    std::vector<Tokens> hyps;
    std::vector<Tokens> gold;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      for (std::size_t i = 0; i < corpus[d].sentences.size(); ++i) {
        hyps.push_back(hypotheses[d][i]);
        gold.push_back(*corpus[d].sentences[i].ref);
      }
    }
    m["bleu"] = bleu(hyps, gold);
  }
  if (selection.gender) {
    m["gender"] = f1_to_json(pronoun_f1(corpus, hypotheses, PronounEvalSpec::gender(world)));
  }
  if (selection.formality) {
    m["formality"] =
        f1_to_json(pronoun_f1(corpus, hypotheses, PronounEvalSpec::formality(world)));
  }
  if (selection.contrastive) {
    if (contrastive.empty()) {
      const std::vector<ContrastiveItem> items = make_contrastive_items(world, corpus, window);
      m["contrastive"] = contrastive_accuracy(scorer, items);
    } else {
      m["contrastive"] = contrastive_accuracy(scorer, contrastive);
    }
  }
  return m;
}

RunReport run_strategy(const ScorerContract& scorer, const WorldSpec& world, const Corpus& corpus,
                       const RunParams& params, const MetricSelection& selection,
                       std::size_t jobs, std::span<const ContrastiveItem> contrastive) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.params = params;
  report.results = decode_corpus(params.strategy, scorer, corpus, params.decode, jobs);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    report.doc_ids.push_back(corpus[d].doc_id);
    report.forward_passes += report.results[d].forward_passes;
  }
  const bool refs = !corpus.empty() && std::all_of(corpus.begin(), corpus.end(),
                                                   [](const Document& d) { return d.has_references(); });
  MetricSelection effective = selection;
  if (!refs) effective.bleu = effective.gender = effective.formality = false;
  if (corpus.empty()) effective = MetricSelection{false, false, false, false, false};
  report.metrics = compute_metrics(scorer, world, corpus, report_targets(report),
                                   params.decode.window, effective, contrastive);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

json comparison_json(const std::vector<RunReport>& runs, double reference_ppl, double wall_time_s) {
  json rows = json::array();
  json params = nullptr;
  for (const RunReport& r : runs) {
    json p = report_to_json(r).at("params");
    if (params.is_null()) params = p;
    rows.push_back({{"strategy", to_string(r.params.strategy)},
                    {"metrics", r.metrics},
                    {"forward_passes", r.forward_passes}});
  }
  return {{"params", params},
          {"reference_ppl", std::isnan(reference_ppl) ? json(nullptr) : json(reference_ppl)},
          {"rows", std::move(rows)},
          {"wall_time_s", wall_time_s}};
}

namespace {

std::string cell(const json& metrics, const char* key, bool percent, const char* sub = nullptr) {
  if (!metrics.is_object() || !metrics.contains(key)) return "-";
  const json& v = sub ? metrics.at(key).at(sub) : metrics.at(key);
  std::ostringstream os;
  os << std::fixed << std::setprecision(percent ? 1 : 3) << (percent ? 100.0 : 1.0) * v.get<double>();
  return os.str();
}

}  // namespace

std::string comparison_table(const json& comparison) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "strategy" << std::right << std::setw(9) << "PPL"
     << std::setw(8) << "BLEU" << std::setw(9) << "gender" << std::setw(11) << "formality"
     << std::setw(14) << "fwd-passes" << '\n';
  if (!comparison.at("reference_ppl").is_null()) {
    os << std::left << std::setw(16) << "reference" << std::right << std::setw(9) << std::fixed
       << std::setprecision(3) << comparison.at("reference_ppl").get<double>() << '\n';
  }
  for (const json& row : comparison.at("rows")) {
    const json& m = row.at("metrics");
    os << std::left << std::setw(16) << row.at("strategy").get<std::string>() << std::right
       << std::setw(9) << cell(m, "ppl", false) << std::setw(8) << cell(m, "bleu", true)
       << std::setw(9) << cell(m, "gender", true, "micro_f1") << std::setw(11)
       << cell(m, "formality", true, "micro_f1") << std::setw(14)
       << row.at("forward_passes").get<std::uint64_t>() << '\n';
  }
  return os.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace docdec
