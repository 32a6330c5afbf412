#include "docdec/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace docdec {

using nlohmann::json;

namespace {

constexpr std::pair<AnnotationClass, std::string_view> kClassNames[] = {
    {AnnotationClass::kGenderM, "gender-M"},
    {AnnotationClass::kGenderF, "gender-F"},
    {AnnotationClass::kGenderN, "gender-N"},
    {AnnotationClass::kFormal, "formality-formal"},
    {AnnotationClass::kInformal, "formality-informal"},
};

}  // namespace

std::string_view to_string(AnnotationClass c) {
  for (auto [cls, name] : kClassNames) {
    if (cls == c) return name;
  }
  return "?";
}

AnnotationClass parse_annotation_class(std::string_view s) {
  for (auto [cls, name] : kClassNames) {
    if (name == s) return cls;
  }
  throw Error("unknown annotation class '" + std::string(s) + "'");
}

bool is_gender(AnnotationClass c) {
  return c == AnnotationClass::kGenderM || c == AnnotationClass::kGenderF ||
         c == AnnotationClass::kGenderN;
}

Gender gender_of(AnnotationClass c) {
  switch (c) {
    case AnnotationClass::kGenderM: return Gender::kMale;
    case AnnotationClass::kGenderF: return Gender::kFemale;
    case AnnotationClass::kGenderN: return Gender::kNeuter;
    default: throw Error("annotation is not a gender class");
  }
}

AnnotationClass gender_annotation(Gender g) {
  switch (g) {
    case Gender::kMale: return AnnotationClass::kGenderM;
    case Gender::kFemale: return AnnotationClass::kGenderF;
    case Gender::kNeuter: return AnnotationClass::kGenderN;
  }
  return AnnotationClass::kGenderM;
}

AnnotationClass formality_annotation(Formality f) {
  return f == Formality::kFormal ? AnnotationClass::kFormal : AnnotationClass::kInformal;
}

bool Document::has_references() const {
  return std::all_of(sentences.begin(), sentences.end(),
                     [](const Sentence& s) { return s.ref.has_value(); });
}

namespace {

void validate_document(const Document& d) {
  if (d.sentences.empty()) throw Error("document '" + d.doc_id + "' has no sentences");
  for (std::size_t i = 0; i < d.sentences.size(); ++i) {
    const Sentence& s = d.sentences[i];
    if (s.src.empty()) {
      throw Error("document '" + d.doc_id + "' sentence " + std::to_string(i) +
                  " has an empty source");
    }
    if (s.annotations) {
      for (const Annotation& a : *s.annotations) {
        if (a.pos >= s.src.size()) {
          throw Error("document '" + d.doc_id + "' sentence " + std::to_string(i) +
                      ": annotation position out of range");
        }
      }
    }
  }
}

json sentence_to_json(const Sentence& s) {
  json j;
  j["src"] = s.src;
  if (s.ref) j["ref"] = *s.ref;
  if (s.annotations) {
    json arr = json::array();
    for (const Annotation& a : *s.annotations) {
      arr.push_back({{"pos", a.pos}, {"class", to_string(a.cls)}});
    }
    j["annotations"] = std::move(arr);
  }
  return j;
}

Sentence sentence_from_json(const json& j) {
  Sentence s;
  s.src = j.at("src").get<Tokens>();
  if (j.contains("ref")) s.ref = j.at("ref").get<Tokens>();
  if (j.contains("annotations")) {
    std::vector<Annotation> anns;
    for (const json& a : j.at("annotations")) {
      anns.push_back({a.at("pos").get<std::size_t>(),
                      parse_annotation_class(a.at("class").get<std::string>())});
    }
    s.annotations = std::move(anns);
  }
  return s;
}

}  // namespace

void validate_corpus(const Corpus& corpus) {
  std::set<std::string> ids;
  for (const Document& d : corpus) {
    validate_document(d);
    if (!ids.insert(d.doc_id).second) throw Error("duplicate doc_id '" + d.doc_id + "'");
  }
}

Corpus parse_corpus(std::string_view jsonl) {
  Corpus corpus;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Document doc;
    try {
      const json j = json::parse(line);
      doc.doc_id = j.at("doc_id").get<std::string>();
      for (const json& s : j.at("sentences")) doc.sentences.push_back(sentence_from_json(s));
      validate_document(doc);
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!ids.insert(doc.doc_id).second) {
      throw ParseError(line_no, "duplicate doc_id '" + doc.doc_id + "'");
    }
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const Document& d : corpus) {
    json j;
    j["doc_id"] = d.doc_id;
    json sents = json::array();
    for (const Sentence& s : d.sentences) sents.push_back(sentence_to_json(s));
    j["sentences"] = std::move(sents);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << corpus_to_jsonl(corpus);
}

std::vector<Window> make_windows(const Document& document, std::size_t window_size,
                                 WindowMode mode) {
  if (window_size == 0) throw Error("window size must be at least 1");
  const std::size_t m = document.sentences.size();
  std::vector<Window> windows;
  auto add = [&](std::size_t first, std::size_t last, std::size_t center,
                 std::vector<std::size_t> outputs) {
    Window w;
    w.doc_id = document.doc_id;
    w.center_index = center;
    for (std::size_t i = first; i <= last; ++i) w.member_indices.push_back(i);
    w.output_indices = std::move(outputs);
    windows.push_back(std::move(w));
  };
  switch (mode) {
    case WindowMode::kNonOverlapping:
      for (std::size_t first = 0; first < m; first += window_size) {
        const std::size_t last = std::min(m, first + window_size) - 1;
        std::vector<std::size_t> outputs;
        for (std::size_t i = first; i <= last; ++i) outputs.push_back(i);
        add(first, last, first, std::move(outputs));
      }
      break;
    case WindowMode::kSlidingLast:
      for (std::size_t i = 0; i < m; ++i) {
        add(i + 1 >= window_size ? i + 1 - window_size : 0, i, i, {i});
      }
      break;
    case WindowMode::kSlidingFirst:
      for (std::size_t i = 0; i < m; ++i) add(i, std::min(m - 1, i + window_size - 1), i, {i});
      break;
    case WindowMode::kSingle:
      for (std::size_t i = 0; i < m; ++i) add(i, i, i, {i});
      break;
  }
  return windows;
}

Tokens join_sources(const Document& document, std::size_t first, std::size_t last,
                    const Token& separator) {
  Tokens out;
  for (std::size_t i = first; i <= last; ++i) {
    if (i != first) out.push_back(separator);
    const Tokens& src = document.sentences.at(i).src;
    out.insert(out.end(), src.begin(), src.end());
  }
  return out;
}

Tokens context_from(const std::vector<Tokens>& sentences, std::size_t first, std::size_t end,
                    const Token& separator) {
  Tokens out;
  for (std::size_t i = first; i < end; ++i) {
    out.insert(out.end(), sentences.at(i).begin(), sentences.at(i).end());
    out.push_back(separator);
  }
  return out;
}

}  // namespace docdec
