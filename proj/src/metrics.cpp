#include "docdec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace docdec {

using nlohmann::json;

std::string_view to_string(Conditioning c) {
  switch (c) {
    case Conditioning::kOwnContext: return "own-context";
    case Conditioning::kReferenceContext: return "reference-context";
    case Conditioning::kNoContext: return "no-context";
  }
  return "?";
}

Conditioning parse_conditioning(std::string_view s) {
  for (Conditioning c : {Conditioning::kOwnContext, Conditioning::kReferenceContext,
                         Conditioning::kNoContext}) {
    if (to_string(c) == s) return c;
  }
  throw Error("unknown conditioning '" + std::string(s) + "'");
}

double perplexity(const ScorerContract& scorer, const Corpus& documents,
                  const DocumentTargets& targets, Conditioning conditioning, std::size_t window) {
  if (window == 0) throw Error("window size must be at least 1");
  if (targets.size() != documents.size()) throw Error("targets are not aligned with documents");
  double logprob = 0.0;
  std::size_t tokens = 0;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const Document& doc = documents[d];
    const std::vector<Tokens>& hyps = targets[d];
    if (hyps.size() != doc.sentences.size()) {
      throw Error("targets for document '" + doc.doc_id + "' are not aligned with its sentences");
    }
    std::vector<Tokens> refs;
    if (conditioning == Conditioning::kReferenceContext) {
      if (!doc.has_references()) {
        throw Error("reference-context perplexity needs references ('" + doc.doc_id + "')");
      }
      for (const Sentence& s : doc.sentences) refs.push_back(*s.ref);
    }
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const std::size_t first =
          conditioning == Conditioning::kNoContext ? i : (i + 1 >= window ? i + 1 - window : 0);
      const Tokens src = join_sources(doc, first, i, scorer.separator());
      Tokens ctx;
      if (conditioning == Conditioning::kOwnContext) {
        ctx = context_from(hyps, first, i, scorer.separator());
      } else if (conditioning == Conditioning::kReferenceContext) {
        ctx = context_from(refs, first, i, scorer.separator());
      }
      Tokens target = hyps[i];
      target.push_back(scorer.eos());
      logprob += score_sequence(scorer, src, ctx, target).total_logprob;
      tokens += target.size();
    }
  }
  if (tokens == 0) throw Error("perplexity over zero tokens");
  return std::exp(-logprob / static_cast<double>(tokens));
}

double bleu(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references) {
  if (hypotheses.size() != references.size()) {
    throw Error("BLEU needs as many hypotheses as references");
  }
  constexpr std::size_t kMaxOrder = 4;
  std::array<std::size_t, kMaxOrder> matches{};
  std::array<std::size_t, kMaxOrder> totals{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const Tokens& hyp = hypotheses[s];
    const Tokens& ref = references[s];
    hyp_len += hyp.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      if (hyp.size() < n) continue;
      std::map<std::vector<Token>, std::size_t> ref_counts;
      for (std::size_t i = 0; i + n <= ref.size(); ++i) {
        ++ref_counts[Tokens(ref.begin() + static_cast<std::ptrdiff_t>(i),
                            ref.begin() + static_cast<std::ptrdiff_t>(i + n))];
      }
      std::map<std::vector<Token>, std::size_t> hyp_counts;
      for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
        ++hyp_counts[Tokens(hyp.begin() + static_cast<std::ptrdiff_t>(i),
                            hyp.begin() + static_cast<std::ptrdiff_t>(i + n))];
      }
      for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
      }
      totals[n - 1] += hyp.size() - n + 1;
    }
  }
  double log_precision = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (matches[n] == 0) return 0.0;
    log_precision += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
  }
  const double brevity =
      std::min(0.0, 1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return std::exp(brevity + log_precision / static_cast<double>(kMaxOrder));
}

PronounEvalSpec PronounEvalSpec::gender(const WorldSpec& world) {
  PronounEvalSpec spec;
  spec.category = PronounCategory::kGender;
  spec.src_triggers = {world.pronoun_src};
  for (Gender g : {Gender::kMale, Gender::kFemale, Gender::kNeuter}) {
    spec.class_map[world.pronoun_token(g)] = std::string(to_string(g));
  }
  return spec;
}

PronounEvalSpec PronounEvalSpec::formality(const WorldSpec& world) {
  PronounEvalSpec spec;
  spec.category = PronounCategory::kFormality;
  spec.src_triggers = {world.formality_src};
  for (Formality f : {Formality::kInformal, Formality::kFormal}) {
    spec.class_map[world.formality_token(f)] = std::string(to_string(f));
  }
  return spec;
}

namespace {

double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

std::vector<std::string> classes_in(const Tokens& tokens, const PronounEvalSpec& spec) {
  std::vector<std::string> out;
  for (const Token& t : tokens) {
    if (auto it = spec.class_map.find(t); it != spec.class_map.end()) out.push_back(it->second);
  }
  return out;
}

}  // namespace

F1Report pronoun_f1(const Corpus& documents, const DocumentTargets& hypotheses,
                    const PronounEvalSpec& spec) {
  if (hypotheses.size() != documents.size()) {
    throw Error("hypotheses are not aligned with documents");
  }
  F1Report report;
  for (const auto& [token, cls] : spec.class_map) report.per_class[cls];
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const Document& doc = documents[d];
    if (hypotheses[d].size() != doc.sentences.size()) {
      throw Error("hypotheses for document '" + doc.doc_id + "' are not aligned");
    }
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      const Sentence& s = doc.sentences[i];
      if (!s.ref) continue;
      const auto triggers = static_cast<std::size_t>(
          std::count_if(s.src.begin(), s.src.end(),
                        [&](const Token& t) { return spec.src_triggers.contains(t); }));
      if (triggers == 0) continue;
      const std::vector<std::string> gold = classes_in(*s.ref, spec);
      const std::vector<std::string> pred = classes_in(hypotheses[d][i], spec);
      const std::size_t n = std::min(triggers, gold.size());
      for (std::size_t k = 0; k < n; ++k) {
        ClassScores& truth = report.per_class[gold[k]];
        ++truth.support;
        ++report.instances;
        if (k < pred.size() && pred[k] == gold[k]) {
          ++truth.tp;
        } else {
          ++truth.fn;
          if (k < pred.size()) ++report.per_class[pred[k]].fp;
        }
      }
    }
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  double macro_sum = 0.0;
  for (auto& [cls, c] : report.per_class) {
    c.precision = safe_ratio(c.tp, c.tp + c.fp);
    c.recall = safe_ratio(c.tp, c.tp + c.fn);
    c.f1 = f1_of(c.precision, c.recall);
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
    if (c.support >= spec.min_support) {
      report.macro_classes.push_back(cls);
      macro_sum += c.f1;
    }
  }
  if (!report.macro_classes.empty()) {
    report.macro_f1 = macro_sum / static_cast<double>(report.macro_classes.size());
  }
  report.micro_f1 = f1_of(safe_ratio(tp, tp + fp), safe_ratio(tp, tp + fn));
  return report;
}

double contrastive_accuracy(const ScorerContract& scorer, std::span<const ContrastiveItem> items) {
  if (items.empty()) throw Error("contrastive evaluation needs at least one item");
  auto score = [&](const ContrastiveItem& item, Tokens target) {
    if (target.empty() || target.back() != scorer.eos()) target.push_back(scorer.eos());
    return score_sequence(scorer, item.src, item.ctx, target).total_logprob;
  };
  std::size_t correct = 0;
  for (const ContrastiveItem& item : items) {
    if (item.wrong.empty()) throw Error("contrastive item without wrong targets");
    const double good = score(item, item.correct);
    const bool wins = std::all_of(item.wrong.begin(), item.wrong.end(),
                                  [&](const Tokens& w) { return good > score(item, w); });
    if (wins) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

std::vector<ContrastiveItem> make_contrastive_items(const WorldSpec& world, const Corpus& corpus,
                                                    std::size_t window) {
  if (window == 0) throw Error("window size must be at least 1");
  std::vector<ContrastiveItem> items;
  for (const Document& doc : corpus) {
    if (!doc.has_references()) continue;
    std::vector<Tokens> refs;
    for (const Sentence& s : doc.sentences) refs.push_back(*s.ref);
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      const Sentence& s = doc.sentences[i];
      if (!s.annotations) continue;
      for (const Annotation& a : *s.annotations) {
        if (!is_gender(a.cls) || a.pos >= refs[i].size()) continue;
        const Token& gold = refs[i][a.pos];
        const auto& pronouns = world.pronoun_tgt;
        if (std::find(pronouns.begin(), pronouns.end(), gold) == pronouns.end()) continue;
        const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
        ContrastiveItem item;
        item.src = join_sources(doc, first, i, world.separator);
        item.ctx = context_from(refs, first, i, world.separator);
        item.correct = refs[i];
        for (const Token& p : pronouns) {
          if (p == gold) continue;
          Tokens wrong = refs[i];
          wrong[a.pos] = p;
          item.wrong.push_back(std::move(wrong));
        }
        const std::size_t right_end = std::min(doc.sentences.size(), i + window);
        item.ctx_right = context_from(refs, i + 1, right_end, world.separator);
        items.push_back(std::move(item));
      }
    }
  }
  return items;
}

std::vector<ContrastiveItem> parse_contrastive(std::string_view jsonl) {
  std::vector<ContrastiveItem> items;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      ContrastiveItem item;
      item.src = j.at("src").get<Tokens>();
      item.ctx = j.value("ctx", Tokens{});
      item.correct = j.at("correct").get<Tokens>();
      item.wrong = j.at("wrong").get<std::vector<Tokens>>();
      item.ctx_right = j.value("ctx_right", Tokens{});
      if (item.wrong.empty()) throw ParseError(line_no, "item has no wrong targets");
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return items;
}

std::vector<ContrastiveItem> load_contrastive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open contrastive file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_contrastive(buf.str());
}

std::string contrastive_to_jsonl(std::span<const ContrastiveItem> items) {
  std::string out;
  for (const ContrastiveItem& item : items) {
    json j{{"src", item.src}, {"ctx", item.ctx}, {"correct", item.correct}, {"wrong", item.wrong}};
    if (!item.ctx_right.empty()) j["ctx_right"] = item.ctx_right;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace docdec
