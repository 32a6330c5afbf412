#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "docdec/corpus.hpp"

using namespace docdec;

namespace {

Document doc_of(std::size_t m) {
  Document d;
  d.doc_id = "d";
  for (std::size_t i = 0; i < m; ++i) d.sentences.push_back({{"w" + std::to_string(i)}, {}, {}});
  return d;
}

std::vector<std::vector<std::size_t>> members(const std::vector<Window>& ws) {
  std::vector<std::vector<std::size_t>> out;
  for (const Window& w : ws) out.push_back(w.member_indices);
  return out;
}

}  // namespace

TEST_CASE("non-overlapping windows, M=7 W=3") {
  const auto ws = make_windows(doc_of(7), 3, WindowMode::kNonOverlapping);
  CHECK(members(ws) == std::vector<std::vector<std::size_t>>{{0, 1, 2}, {3, 4, 5}, {6}});
  CHECK(ws[1].output_indices == std::vector<std::size_t>{3, 4, 5});
}

TEST_CASE("sliding-last windows, M=7 W=3") {
  const auto ws = make_windows(doc_of(7), 3, WindowMode::kSlidingLast);
  CHECK(members(ws) == std::vector<std::vector<std::size_t>>{
                           {0}, {0, 1}, {0, 1, 2}, {1, 2, 3}, {2, 3, 4}, {3, 4, 5}, {4, 5, 6}});
  for (std::size_t i = 0; i < ws.size(); ++i) {
    CHECK(ws[i].center_index == i);
    CHECK(ws[i].output_indices == std::vector<std::size_t>{i});
  }
}

TEST_CASE("sliding-first windows, M=5 W=3") {
  const auto ws = make_windows(doc_of(5), 3, WindowMode::kSlidingFirst);
  CHECK(members(ws) ==
        std::vector<std::vector<std::size_t>>{{0, 1, 2}, {1, 2, 3}, {2, 3, 4}, {3, 4}, {4}});
}

TEST_CASE("window size one gives singletons in every mode") {
  for (auto mode : {WindowMode::kNonOverlapping, WindowMode::kSlidingLast,
                    WindowMode::kSlidingFirst, WindowMode::kSingle}) {
    const auto ws = make_windows(doc_of(4), 1, mode);
    REQUIRE(ws.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(ws[i].member_indices == std::vector<std::size_t>{i});
  }
  CHECK_THROWS_AS(make_windows(doc_of(3), 0, WindowMode::kSingle), Error);
}

TEST_CASE("every sentence is the output of exactly one window") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + rng() % 12;
    const std::size_t w = 1 + rng() % (m + 2);
    const Document d = doc_of(m);
    for (auto mode : {WindowMode::kNonOverlapping, WindowMode::kSlidingLast,
                      WindowMode::kSlidingFirst, WindowMode::kSingle}) {
      std::vector<int> hits(m, 0);
      for (const Window& win : make_windows(d, w, mode)) {
        REQUIRE(!win.member_indices.empty());
        CHECK(win.size() <= w);
        for (std::size_t k = 1; k < win.size(); ++k) {
          CHECK(win.member_indices[k] == win.member_indices[k - 1] + 1);
        }
        CHECK(std::find(win.member_indices.begin(), win.member_indices.end(), win.center_index) !=
              win.member_indices.end());
        if (mode == WindowMode::kSlidingLast) CHECK(win.last() == win.center_index);
        if (mode == WindowMode::kSlidingFirst) CHECK(win.first() == win.center_index);
        for (std::size_t o : win.output_indices) ++hits[o];
      }
      for (int h : hits) CHECK(h == 1);
    }
  }
}

TEST_CASE("corpus parsing") {
  SUBCASE("empty input") { CHECK(parse_corpus("").empty()); }
  SUBCASE("one document with two sentences") {
    const Corpus c = parse_corpus(
        R"({"doc_id":"a","sentences":[{"src":["x","y"]},{"src":["z"],"ref":["Z"]}]})");
    REQUIRE(c.size() == 1);
    REQUIRE(c[0].sentences.size() == 2);
    CHECK(c[0].sentences[0].src == Tokens{"x", "y"});
    CHECK(!c[0].sentences[0].ref);
    CHECK(*c[0].sentences[1].ref == Tokens{"Z"});
    CHECK(!c[0].has_references());
  }
  SUBCASE("missing src names line 1") {
    try {
      parse_corpus(R"({"doc_id":"a","sentences":[{"ref":["x"]}]})");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("malformed json names its line") {
    try {
      parse_corpus("{\"doc_id\":\"a\",\"sentences\":[{\"src\":[\"x\"]}]}\n{oops\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("duplicate doc ids") {
    CHECK_THROWS_AS(parse_corpus("{\"doc_id\":\"a\",\"sentences\":[{\"src\":[\"x\"]}]}\n"
                                 "{\"doc_id\":\"a\",\"sentences\":[{\"src\":[\"y\"]}]}\n"),
                    Error);
  }
  SUBCASE("annotation out of range") {
    CHECK_THROWS_AS(
        parse_corpus(
            R"({"doc_id":"a","sentences":[{"src":["x"],"annotations":[{"pos":1,"class":"gender-M"}]}]})"),
        Error);
  }
  SUBCASE("empty document and empty source") {
    CHECK_THROWS_AS(parse_corpus(R"({"doc_id":"a","sentences":[]})"), Error);
    CHECK_THROWS_AS(parse_corpus(R"({"doc_id":"a","sentences":[{"src":[]}]})"), Error);
  }
}

TEST_CASE("corpus save and load round-trip") {
  Corpus c;
  Document d;
  d.doc_id = "doc-1";
  d.sentences.push_back({{"it", "is"}, Tokens{"es", "ist"}, std::vector<Annotation>{{0, AnnotationClass::kGenderN}}});
  d.sentences.push_back({{"you"}, Tokens{"Sie"}, std::vector<Annotation>{{0, AnnotationClass::kFormal}}});
  d.sentences.push_back({{"plain"}, std::nullopt, std::nullopt});
  c.push_back(d);
  c.push_back({"doc-2", {{{"a", "b"}, Tokens{}, std::vector<Annotation>{}}}});

  CHECK(parse_corpus(corpus_to_jsonl(c)) == c);
  const auto path = std::filesystem::temp_directory_path() / "docdec_corpus_roundtrip.jsonl";
  save_corpus(c, path);
  CHECK(load_corpus(path) == c);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), Error);
}

TEST_CASE("joined sources and contexts") {
  Document d;
  d.doc_id = "d";
  d.sentences = {{{"a"}, {}, {}}, {{"b", "c"}, {}, {}}, {{"d"}, {}, {}}};
  CHECK(join_sources(d, 0, 2, "|") == Tokens{"a", "|", "b", "c", "|", "d"});
  CHECK(join_sources(d, 1, 1, "|") == Tokens{"b", "c"});
  const std::vector<Tokens> hyps{{"A"}, {"B", "C"}, {"D"}};
  CHECK(context_from(hyps, 0, 2, "|") == Tokens{"A", "|", "B", "C", "|"});
  CHECK(context_from(hyps, 1, 1, "|").empty());
}
