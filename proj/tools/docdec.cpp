// Command-line driver: corpus generation, decoding, evaluation and strategy
// comparison. Exit codes: 0 success, 1 usage error, 2 data or precondition error.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "docdec/corpus.hpp"
#include "docdec/metrics.hpp"
#include "docdec/model.hpp"
#include "docdec/report.hpp"
#include "docdec/strategies.hpp"
#include "docdec/synthetic.hpp"
#include "docdec/world.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DecodeFlags {
  std::size_t window = 3;
  std::size_t beam = 12;
  std::size_t context_beam = 12;
  std::size_t max_len = 0;
  bool no_length_norm = false;
  double epsilon = std::nan("");
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::vector<std::string> metrics{"ppl", "bleu", "gender", "formality"};
  std::string contrastive;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--window", window, "Sentences per model window")->check(CLI::PositiveNumber);
    cmd->add_option("--beam", beam, "Token-level beam size")->check(CLI::PositiveNumber);
    cmd->add_option("--context-beam", context_beam, "Sentence-level beam of doc-trans-beam")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-len", max_len, "Maximum hypothesis length (0 = automatic)");
    cmd->add_flag("--no-length-norm", no_length_norm, "Rank by raw log-probability");
    cmd->add_option("--epsilon", epsilon, "Override the world's noise mass");
    cmd->add_option("--seed", seed, "Seed recorded in the report");
    cmd->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
    cmd->add_option("--metrics", metrics, "ppl, bleu, gender, formality, contrastive")
        ->delimiter(',');
    cmd->add_option("--contrastive", contrastive, "Contrastive item file (JSON Lines)");
  }

  docdec::RunParams params(docdec::StrategyId strategy, const docdec::WorldSpec& world) const {
    docdec::RunParams p;
    p.strategy = strategy;
    p.decode.window = window;
    p.decode.beam.beam_size = beam;
    p.decode.beam.length_norm = !no_length_norm;
    if (max_len > 0) p.decode.beam.max_len = max_len;
    p.decode.context_beam = context_beam;
    p.epsilon = world.epsilon;
    p.seed = seed;
    return p;
  }
};

docdec::WorldSpec read_world(const std::string& path, double epsilon) {
  docdec::WorldSpec world = docdec::load_world(path);
  if (!std::isnan(epsilon)) {
    world.epsilon = epsilon;
    world.validate();
  }
  return world;
}

void ensure_writable(const std::string& out, bool force) {
  if (out.empty() || out == "-") return;
  if (fs::exists(out) && !force) {
    throw docdec::Error(out + " exists; pass --force to overwrite");
  }
}

void emit(const std::string& out, const std::string& contents) {
  if (out.empty() || out == "-") {
    std::cout << contents;
  } else {
    docdec::write_atomically(out, contents);
  }
}

std::vector<docdec::ContrastiveItem> read_items(const std::string& path) {
  if (path.empty()) return {};
  return docdec::load_contrastive(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document-level translation decoding strategies on a synthetic world"};
  app.require_subcommand(1);

  std::string world_path;
  std::string out;
  bool force = false;

  auto* world_cmd = app.add_subcommand("world", "Write the built-in world spec");
  world_cmd->add_option("--out", out, "Output file (default stdout)");
  world_cmd->add_flag("--force", force, "Overwrite an existing file");

  docdec::SyntheticCorpusOptions gen;
  std::uint64_t gen_seed = 1;
  double gen_epsilon = std::nan("");
  auto* generate = app.add_subcommand("generate", "Generate a synthetic corpus");
  generate->add_option("--world", world_path, "World spec file")->required();
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_option("--docs", gen.n_docs, "Number of documents");
  generate->add_option("--sentences", gen.sents_per_doc, "Sentences per document")
      ->check(CLI::PositiveNumber);
  generate->add_option("--length", gen.sent_len, "Tokens per sentence")->check(CLI::PositiveNumber);
  generate->add_option("--window", gen.window, "Window the antecedents must fit in")
      ->check(CLI::PositiveNumber);
  generate->add_option("--epsilon", gen_epsilon, "Override the world's noise mass");
  generate->add_option("--out", out, "Output corpus file")->required();
  generate->add_flag("--force", force, "Overwrite an existing file");

  std::string corpus_path;
  std::string strategy_name;
  DecodeFlags flags;
  auto* decode = app.add_subcommand("decode", "Decode a corpus with one strategy");
  decode->add_option("corpus", corpus_path, "Corpus file (JSON Lines)")->required();
  decode->add_option("--world", world_path, "World spec file")->required();
  decode->add_option("--strategy", strategy_name, "Decoding strategy")->required();
  flags.add_to(decode);
  decode->add_option("--out", out, "Report file (default stdout)");
  decode->add_flag("--force", force, "Overwrite an existing file");

  std::vector<std::string> strategy_names;
  auto* compare = app.add_subcommand("compare", "Decode with several strategies and tabulate");
  compare->add_option("corpus", corpus_path, "Corpus file (JSON Lines)")->required();
  compare->add_option("--world", world_path, "World spec file")->required();
  compare->add_option("--strategy", strategy_names, "Strategies (default: all)")->delimiter(',');
  flags.add_to(compare);
  compare->add_option("--out", out, "JSON output file; the table goes to stdout");
  compare->add_flag("--force", force, "Overwrite an existing file");

  std::string report_path;
  auto* evaluate = app.add_subcommand("evaluate", "Recompute metrics for a stored report");
  evaluate->add_option("corpus", corpus_path, "Corpus file (JSON Lines)")->required();
  evaluate->add_option("report", report_path, "Report written by decode")->required();
  evaluate->add_option("--world", world_path, "World spec file")->required();
  evaluate->add_option("--metrics", flags.metrics, "ppl, bleu, gender, formality, contrastive")
      ->delimiter(',');
  evaluate->add_option("--contrastive", flags.contrastive, "Contrastive item file");
  evaluate->add_option("--epsilon", flags.epsilon, "Override the noise mass stored in the report");
  evaluate->add_option("--out", out, "Metrics file (default stdout)");
  evaluate->add_flag("--force", force, "Overwrite an existing file");

  std::size_t contrastive_window = 3;
  auto* contrastive = app.add_subcommand("contrastive", "Build contrastive pronoun items");
  contrastive->add_option("corpus", corpus_path, "Annotated corpus with references")->required();
  contrastive->add_option("--world", world_path, "World spec file")->required();
  contrastive->add_option("--window", contrastive_window, "Sentences per window")
      ->check(CLI::PositiveNumber);
  contrastive->add_option("--out", out, "Item file (default stdout)");
  contrastive->add_flag("--force", force, "Overwrite an existing file");

  std::size_t cost_sentences = 1, cost_length = 1, cost_window = 3, cost_h = 12, cost_beam = 12;
  auto* cost = app.add_subcommand("cost", "Print the predicted number of scorer calls");
  cost->add_option("--strategy", strategy_name, "Decoding strategy")->required();
  cost->add_option("--sentences", cost_sentences)->check(CLI::PositiveNumber);
  cost->add_option("--length", cost_length)->check(CLI::PositiveNumber);
  cost->add_option("--window", cost_window)->check(CLI::PositiveNumber);
  cost->add_option("--context-beam", cost_h)->check(CLI::PositiveNumber);
  cost->add_option("--beam", cost_beam)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*world_cmd) {
      ensure_writable(out, force);
      emit(out, docdec::world_to_json(docdec::default_world()));
    } else if (*generate) {
      const docdec::WorldSpec world = read_world(world_path, gen_epsilon);
      ensure_writable(out, force);
      const docdec::Corpus corpus = docdec::generate_synthetic_corpus(world, gen_seed, gen);
      emit(out, docdec::corpus_to_jsonl(corpus));
    } else if (*decode) {
      const docdec::StrategyId strategy = docdec::parse_strategy(strategy_name);
      const docdec::WorldSpec world = read_world(world_path, flags.epsilon);
      const docdec::Corpus corpus = docdec::load_corpus(corpus_path);
      ensure_writable(out, force);
      const docdec::SyntheticModel model(world);
      const auto items = read_items(flags.contrastive);
      const docdec::RunReport report =
          docdec::run_strategy(model, world, corpus, flags.params(strategy, world),
                               docdec::MetricSelection::parse(flags.metrics), flags.jobs, items);
      emit(out, docdec::report_to_json(report).dump(2) + "\n");
    } else if (*compare) {
      std::vector<docdec::StrategyId> wanted;
      for (const std::string& name : strategy_names) wanted.push_back(docdec::parse_strategy(name));
      if (wanted.empty()) {
        auto all = docdec::all_strategies();
        wanted.assign(all.begin(), all.end());
      }
      const docdec::WorldSpec world = read_world(world_path, flags.epsilon);
      const docdec::Corpus corpus = docdec::load_corpus(corpus_path);
      ensure_writable(out, force);
      const docdec::SyntheticModel model(world);
      const auto items = read_items(flags.contrastive);
      const auto selection = docdec::MetricSelection::parse(flags.metrics);
      const auto start = std::chrono::steady_clock::now();
      std::vector<docdec::RunReport> runs;
      for (docdec::StrategyId s : docdec::all_strategies()) {
        if (std::find(wanted.begin(), wanted.end(), s) == wanted.end()) continue;
        runs.push_back(docdec::run_strategy(model, world, corpus, flags.params(s, world),
                                            selection, flags.jobs, items));
      }
      double reference_ppl = std::nan("");
      const bool refs = !corpus.empty() && std::all_of(corpus.begin(), corpus.end(), [](const auto& d) {
        return d.has_references();
      });
      if (refs) {
        docdec::DocumentTargets gold;
        for (const auto& d : corpus) {
          auto& sents = gold.emplace_back();
          for (const auto& s : d.sentences) sents.push_back(*s.ref);
        }
        reference_ppl = docdec::perplexity(model, corpus, gold, docdec::Conditioning::kOwnContext,
                                           flags.window);
      }
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const json table = docdec::comparison_json(runs, reference_ppl, elapsed);
      std::cout << docdec::comparison_table(table);
      if (!out.empty()) emit(out, table.dump(2) + "\n");
    } else if (*evaluate) {
      const docdec::Corpus corpus = docdec::load_corpus(corpus_path);
      std::ifstream in(report_path);
      if (!in) throw docdec::Error("cannot open report " + report_path);
      json stored;
      try {
        stored = json::parse(in);
      } catch (const json::exception& e) {
        throw docdec::Error(std::string("report: ") + e.what());
      }
      const docdec::RunReport report = docdec::report_from_json(stored);
      const double eps = std::isnan(flags.epsilon) ? report.params.epsilon : flags.epsilon;
      const docdec::WorldSpec world = read_world(world_path, eps);
      ensure_writable(out, force);
      const docdec::SyntheticModel model(world);
      const auto items = read_items(flags.contrastive);
      const json metrics = docdec::compute_metrics(
          model, world, corpus, docdec::report_targets(report), report.params.decode.window,
          docdec::MetricSelection::parse(flags.metrics), items);
      emit(out, metrics.dump(2) + "\n");
    } else if (*contrastive) {
      const docdec::WorldSpec world = docdec::load_world(world_path);
      const docdec::Corpus corpus = docdec::load_corpus(corpus_path);
      ensure_writable(out, force);
      emit(out, docdec::contrastive_to_jsonl(
                    docdec::make_contrastive_items(world, corpus, contrastive_window)));
    } else if (*cost) {
      std::cout << docdec::predicted_cost(docdec::parse_strategy(strategy_name), cost_sentences,
                                          cost_length, cost_window, cost_h, cost_beam)
                << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "docdec: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
