#include "docdec/strategies.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <thread>

namespace docdec {

namespace {

constexpr std::array kStrategies = {
    StrategyId::kSentenceLevel, StrategyId::kNoContext,     StrategyId::kFullSegment,
    StrategyId::kLastSentence,  StrategyId::kFirstSentence, StrategyId::kTwoPass,
    StrategyId::kDocTrans,      StrategyId::kDocTransBeam,  StrategyId::kCheating,
};

constexpr std::array<std::string_view, 9> kStrategyNames = {
    "sentence-level", "no-context", "full-segment", "last-sentence", "first-sentence",
    "two-pass",       "doc-trans",  "doc-trans-beam", "cheating",
};

}  // namespace

std::span<const StrategyId> all_strategies() { return kStrategies; }

std::string_view to_string(StrategyId id) { return kStrategyNames[static_cast<std::size_t>(id)]; }

StrategyId parse_strategy(std::string_view name) {
  for (std::size_t i = 0; i < kStrategyNames.size(); ++i) {
    if (kStrategyNames[i] == name) return kStrategies[i];
  }
  throw Error("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(DiagnosticKind kind) {
  return kind == DiagnosticKind::kSeparatorDeficit ? "separator-deficit" : "separator-surplus";
}

namespace {

/// Half-open token ranges of each part plus the repair diagnostic.
struct PartRanges {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::optional<DiagnosticKind> diagnostic;
};

PartRanges split_ranges(std::span<const Token> tokens, std::size_t expected,
                        const Token& separator, const Token& eos) {
  std::size_t n = tokens.size();
  if (n > 0 && tokens[n - 1] == eos) --n;
  PartRanges out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tokens[i] == separator) {
      out.ranges.emplace_back(begin, i);
      begin = i + 1;
    }
  }
  out.ranges.emplace_back(begin, n);
  if (out.ranges.size() < expected) {
    out.diagnostic = DiagnosticKind::kSeparatorDeficit;
    while (out.ranges.size() < expected) out.ranges.emplace_back(n, n);
  } else if (out.ranges.size() > expected) {
    out.diagnostic = DiagnosticKind::kSeparatorSurplus;
    // The merged last part spans the surplus parts with their separators.
    out.ranges[expected - 1].second = out.ranges.back().second;
    out.ranges.resize(expected);
  }
  return out;
}

struct SplitHypothesis {
  std::vector<Hypothesis> parts;
  std::optional<DiagnosticKind> diagnostic;
};

SplitHypothesis split_hypothesis(const Hypothesis& h, std::size_t expected,
                                 const ScorerContract& scorer) {
  const PartRanges pr = split_ranges(h.tokens, expected, scorer.separator(), scorer.eos());
  SplitHypothesis out;
  out.diagnostic = pr.diagnostic;
  for (auto [b, e] : pr.ranges) {
    Hypothesis part;
    part.tokens.assign(h.tokens.begin() + static_cast<std::ptrdiff_t>(b),
                       h.tokens.begin() + static_cast<std::ptrdiff_t>(e));
    part.token_logprobs.assign(h.token_logprobs.begin() + static_cast<std::ptrdiff_t>(b),
                               h.token_logprobs.begin() + static_cast<std::ptrdiff_t>(e));
    for (double lp : part.token_logprobs) part.total_logprob += lp;
    out.parts.push_back(std::move(part));
  }
  return out;
}

class DocumentDecoder {
 public:
  DocumentDecoder(const ScorerContract& scorer, const Document& doc, const DecodeOptions& opt)
      : counter_(scorer), doc_(doc), opt_(opt), m_(doc.sentences.size()) {
    result_.per_sentence.resize(m_);
  }

  DecodeResult run(StrategyId strategy) {
    switch (strategy) {
      case StrategyId::kSentenceLevel:
      case StrategyId::kNoContext:
        windowed(WindowMode::kSingle);
        break;
      case StrategyId::kFullSegment: windowed(WindowMode::kNonOverlapping); break;
      case StrategyId::kLastSentence: windowed(WindowMode::kSlidingLast); break;
      case StrategyId::kFirstSentence: windowed(WindowMode::kSlidingFirst); break;
      case StrategyId::kTwoPass: {
        windowed(WindowMode::kSingle);
        std::vector<Tokens> first_pass;
        for (const Hypothesis& h : result_.per_sentence) first_pass.push_back(h.tokens);
        result_.diagnostics.clear();
        result_.score = 0.0;
        for (std::size_t i = 0; i < m_; ++i) contextual(i, first_pass);
        break;
      }
      case StrategyId::kDocTrans: {
        std::vector<Tokens> chosen(m_);
        for (std::size_t i = 0; i < m_; ++i) chosen[i] = contextual(i, chosen);
        break;
      }
      case StrategyId::kCheating: {
        std::vector<Tokens> refs;
        for (const Sentence& s : doc_.sentences) refs.push_back(*s.ref);
        for (std::size_t i = 0; i < m_; ++i) contextual(i, refs);
        break;
      }
      case StrategyId::kDocTransBeam: context_beam(); break;
    }
    result_.forward_passes = counter_.calls();
    return std::move(result_);
  }

 private:
  std::size_t context_start(std::size_t i) const {
    return i + 1 >= opt_.window ? i + 1 - opt_.window : 0;
  }

  Hypothesis best(std::span<const Token> src, std::span<const Token> ctx) {
    std::vector<Hypothesis> hyps = beam_search(counter_, src, ctx, opt_.beam);
    return std::move(hyps.front());
  }

  void note(std::size_t sentence, const std::optional<DiagnosticKind>& kind) {
    if (kind) result_.diagnostics.push_back({sentence, *kind});
  }

  void windowed(WindowMode mode) {
    for (const Window& w : make_windows(doc_, opt_.window, mode)) {
      const Tokens src = join_sources(doc_, w.first(), w.last(), counter_.separator());
      const Hypothesis h = best(src, {});
      result_.score += h.total_logprob;
      SplitHypothesis split = split_hypothesis(h, w.size(), counter_);
      note(w.center_index, split.diagnostic);
      for (std::size_t out : w.output_indices) {
        result_.per_sentence[out] = std::move(split.parts[out - w.first()]);
      }
    }
  }

  /// Decodes sentence i with past source context and the given target context.
  Tokens contextual(std::size_t i, const std::vector<Tokens>& targets) {
    const std::size_t first = context_start(i);
    const Tokens src = join_sources(doc_, first, i, counter_.separator());
    const Tokens ctx = context_from(targets, first, i, counter_.separator());
    const Hypothesis h = best(src, ctx);
    result_.score += h.total_logprob;
    SplitHypothesis split = split_hypothesis(h, 1, counter_);
    note(i, split.diagnostic);
    result_.per_sentence[i] = std::move(split.parts.front());
    return result_.per_sentence[i].tokens;
  }

  struct Stream {
    std::vector<Hypothesis> sentences;
    std::vector<Tokens> tokens;
    std::vector<std::size_t> ids;
    std::vector<Diagnostic> diagnostics;
    double score = 0.0;
    bool idle = false;  // copy occupying a spare slot; its expansions are dropped
  };

  void context_beam() {
    const std::size_t h = opt_.context_beam;
    if (h == 0) throw Error("context beam must be at least 1");
    std::vector<Stream> slots(h);
    for (std::size_t s = 1; s < h; ++s) slots[s].idle = true;

    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t first = context_start(i);
      const Tokens src = join_sources(doc_, first, i, counter_.separator());
      std::vector<Stream> candidates;
      for (const Stream& slot : slots) {
        const Tokens ctx = context_from(slot.tokens, first, i, counter_.separator());
        std::vector<Hypothesis> hyps = beam_search(counter_, src, ctx, opt_.beam);
        if (slot.idle) continue;
        for (std::size_t r = 0; r < hyps.size() && r < h; ++r) {
          Stream ext = slot;
          ext.score += hyps[r].total_logprob;
          for (const Token& t : hyps[r].tokens) ext.ids.push_back(counter_.index_of(t));
          SplitHypothesis split = split_hypothesis(hyps[r], 1, counter_);
          if (split.diagnostic) ext.diagnostics.push_back({i, *split.diagnostic});
          ext.tokens.push_back(split.parts.front().tokens);
          ext.sentences.push_back(std::move(split.parts.front()));
          candidates.push_back(std::move(ext));
        }
      }
      std::sort(candidates.begin(), candidates.end(), [](const Stream& a, const Stream& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.ids < b.ids;
      });
      if (candidates.size() > h) candidates.resize(h);
      while (candidates.size() < h) {
        Stream spare = candidates.front();
        spare.idle = true;
        candidates.push_back(std::move(spare));
      }
      slots = std::move(candidates);
    }

    Stream& winner = slots.front();
    result_.per_sentence = std::move(winner.sentences);
    result_.diagnostics = std::move(winner.diagnostics);
    result_.score = winner.score;
  }

  CountingScorer counter_;
  const Document& doc_;
  const DecodeOptions& opt_;
  std::size_t m_;
  DecodeResult result_;
};

}  // namespace

SplitResult split_by_separator(std::span<const Token> tokens, std::size_t expected_parts,
                               const Token& separator, const Token& eos) {
  if (expected_parts == 0) throw Error("expected_parts must be at least 1");
  const PartRanges pr = split_ranges(tokens, expected_parts, separator, eos);
  SplitResult out;
  out.diagnostic = pr.diagnostic;
  for (auto [b, e] : pr.ranges) {
    out.parts.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(b),
                           tokens.begin() + static_cast<std::ptrdiff_t>(e));
  }
  return out;
}

DecodeResult decode_document(StrategyId strategy, const ScorerContract& scorer,
                             const Document& document, const DecodeOptions& options) {
  if (options.window == 0) throw Error("window size must be at least 1");
  if (options.context_beam == 0) throw Error("context beam must be at least 1");
  options.beam.validate();
  if (document.sentences.empty()) throw Error("document '" + document.doc_id + "' is empty");
  if (strategy == StrategyId::kCheating && !document.has_references()) {
    throw Error("strategy cheating requires references (document '" + document.doc_id + "')");
  }
  return DocumentDecoder(scorer, document, options).run(strategy);
}

std::vector<DecodeResult> decode_corpus(StrategyId strategy, const ScorerContract& scorer,
                                        const Corpus& corpus, const DecodeOptions& options,
                                        std::size_t jobs) {
  std::vector<DecodeResult> results(corpus.size());
  std::vector<std::exception_ptr> errors(corpus.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(1, corpus.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t d = next++; d < corpus.size(); d = next++) {
      try {
        results[d] = decode_document(strategy, scorer, corpus[d], options);
      } catch (...) {
        errors[d] = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t j = 0; j < jobs; ++j) workers.emplace_back(work);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::uint64_t predicted_cost(StrategyId strategy, std::size_t sentences, std::size_t length,
                             std::size_t window, std::size_t context_beam, std::size_t beam_size) {
  const std::uint64_t n = sentences;
  const std::uint64_t per_sentence = static_cast<std::uint64_t>(beam_size) * (length + 1);
  // Sentences covered by the windows of the sliding modes: sum of min(i+1, W).
  std::uint64_t covered = 0;
  for (std::uint64_t i = 0; i < n; ++i) covered += std::min<std::uint64_t>(i + 1, window);
  switch (strategy) {
    case StrategyId::kSentenceLevel:
    case StrategyId::kNoContext:
    case StrategyId::kFullSegment:
    case StrategyId::kDocTrans:
    case StrategyId::kCheating:
      return per_sentence * n;
    case StrategyId::kLastSentence:
    case StrategyId::kFirstSentence:
      return per_sentence * covered;
    case StrategyId::kTwoPass:
      return 2 * per_sentence * n;
    case StrategyId::kDocTransBeam:
      return context_beam * per_sentence * n;
  }
  return 0;
}

}  // namespace docdec
