#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "docdec/report.hpp"
#include "docdec/search.hpp"
#include "docdec/strategies.hpp"
#include "docdec/synthetic.hpp"

namespace py = pybind11;
using namespace docdec;

namespace {

std::string generate(const std::string& world_json, std::uint64_t seed, std::size_t n_docs,
                     std::size_t sents_per_doc, std::size_t sent_len, std::size_t window) {
  SyntheticCorpusOptions o;
  o.n_docs = n_docs;
  o.sents_per_doc = sents_per_doc;
  o.sent_len = sent_len;
  o.window = window;
  return corpus_to_jsonl(generate_synthetic_corpus(world_from_json(world_json), seed, o));
}

std::string decode(const std::string& strategy, const std::string& world_json,
                   const std::string& corpus_jsonl, std::size_t window, std::size_t beam,
                   std::size_t context_beam, bool length_norm, std::size_t jobs,
                   const std::vector<std::string>& metrics) {
  const WorldSpec world = world_from_json(world_json);
  const Corpus corpus = parse_corpus(corpus_jsonl);
  const SyntheticModel model(world);
  RunParams p;
  p.strategy = parse_strategy(strategy);
  p.decode.window = window;
  p.decode.beam.beam_size = beam;
  p.decode.beam.length_norm = length_norm;
  p.decode.context_beam = context_beam;
  p.epsilon = world.epsilon;
  RunReport report;
  {
    py::gil_scoped_release release;
    report = run_strategy(model, world, corpus, p, MetricSelection::parse(metrics), jobs);
  }
  return report_to_json(report).dump();
}

std::vector<std::pair<Tokens, double>> search(const std::string& world_json, const Tokens& src,
                                              const Tokens& context, std::size_t beam,
                                              bool length_norm) {
  const SyntheticModel model(world_from_json(world_json));
  BeamParams p;
  p.beam_size = beam;
  p.length_norm = length_norm;
  std::vector<std::pair<Tokens, double>> out;
  for (const Hypothesis& h : beam_search(model, src, context, p)) {
    out.emplace_back(h.tokens, h.total_logprob);
  }
  return out;
}

std::map<Token, double> distribution(const std::string& world_json, const Tokens& src,
                                     const Tokens& context, const Tokens& prefix) {
  const SyntheticModel model(world_from_json(world_json));
  const Distribution d = model.next_token_distribution(src, context, prefix);
  std::map<Token, double> out;
  for (std::size_t i = 0; i < d.log_probs.size(); ++i) out[model.vocab()[i]] = d.log_probs[i];
  return out;
}

py::tuple split(const Tokens& tokens, std::size_t expected, const Token& sep, const Token& eos) {
  const SplitResult r = split_by_separator(tokens, expected, sep, eos);
  py::object diag = py::none();
  if (r.diagnostic) diag = py::str(std::string(to_string(*r.diagnostic)));
  return py::make_tuple(r.parts, diag);
}

}  // namespace

PYBIND11_MODULE(_docdec, m) {
  m.doc() = "Document-level translation decoding strategies on a synthetic world";
  py::register_exception<Error>(m, "DocdecError", PyExc_ValueError);

  m.def("default_world", [] { return world_to_json(default_world()); });
  m.def("strategies", [] {
    std::vector<std::string> names;
    for (StrategyId s : all_strategies()) names.emplace_back(to_string(s));
    return names;
  });
  m.def("generate", &generate, py::arg("world"), py::arg("seed"), py::arg("n_docs") = 100,
        py::arg("sents_per_doc") = 6, py::arg("sent_len") = 8, py::arg("window") = 3);
  m.def("decode", &decode, py::arg("strategy"), py::arg("world"), py::arg("corpus"),
        py::arg("window") = 3, py::arg("beam") = 12, py::arg("context_beam") = 12,
        py::arg("length_norm") = true, py::arg("jobs") = 1,
        py::arg("metrics") = std::vector<std::string>{"ppl", "bleu", "gender", "formality"});
  m.def("beam_search", &search, py::arg("world"), py::arg("src"), py::arg("context"),
        py::arg("beam") = 12, py::arg("length_norm") = true);
  m.def("next_token_logprobs", &distribution, py::arg("world"), py::arg("src"),
        py::arg("context"), py::arg("prefix"));
  m.def("predicted_cost",
        [](const std::string& strategy, std::size_t n, std::size_t len, std::size_t window,
           std::size_t context_beam, std::size_t beam) {
          return predicted_cost(parse_strategy(strategy), n, len, window, context_beam, beam);
        },
        py::arg("strategy"), py::arg("sentences"), py::arg("length"), py::arg("window") = 3,
        py::arg("context_beam") = 12, py::arg("beam") = 12);
  m.def("bleu", &bleu, py::arg("hypotheses"), py::arg("references"));
  m.def("split_by_separator", &split, py::arg("tokens"), py::arg("expected_parts"),
        py::arg("separator") = "<sep>", py::arg("eos") = "</s>");
}
