#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docdec/types.hpp"
#include "docdec/world.hpp"

namespace docdec {

enum class AnnotationClass {
  kGenderM,
  kGenderF,
  kGenderN,
  kFormal,
  kInformal,
};

std::string_view to_string(AnnotationClass c);
AnnotationClass parse_annotation_class(std::string_view s);
bool is_gender(AnnotationClass c);
Gender gender_of(AnnotationClass c);
AnnotationClass gender_annotation(Gender g);
AnnotationClass formality_annotation(Formality f);

struct Annotation {
  std::size_t pos = 0;
  AnnotationClass cls = AnnotationClass::kGenderM;

  bool operator==(const Annotation&) const = default;
};

struct Sentence {
  Tokens src;
  std::optional<Tokens> ref;
  std::optional<std::vector<Annotation>> annotations;

  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<Sentence> sentences;

  bool operator==(const Document&) const = default;

  bool has_references() const;
};

using Corpus = std::vector<Document>;

/// Checks per-document invariants (non-empty, non-empty sources, annotation
/// positions in range) and doc_id uniqueness across the corpus.
void validate_corpus(const Corpus& corpus);

Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view jsonl);
std::string corpus_to_jsonl(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

enum class WindowMode { kNonOverlapping, kSlidingLast, kSlidingFirst, kSingle };

/// A contiguous run of sentences fed to the model as one input.
struct Window {
  std::string doc_id;
  std::size_t center_index = 0;
  std::vector<std::size_t> member_indices;
  /// Sentence indices whose translation is taken from this window.
  std::vector<std::size_t> output_indices;

  std::size_t first() const { return member_indices.front(); }
  std::size_t last() const { return member_indices.back(); }
  std::size_t size() const { return member_indices.size(); }
};

/// Splits a document of M sentences into windows of at most `window_size`
/// sentences. Every sentence is the output of exactly one window. Windows never
/// cross the document boundary.
std::vector<Window> make_windows(const Document& document, std::size_t window_size,
                                 WindowMode mode);

/// Source sentences [first, last] joined by `separator`.
Tokens join_sources(const Document& document, std::size_t first, std::size_t last,
                    const Token& separator);

/// Target context: each sentence followed by `separator`.
Tokens context_from(const std::vector<Tokens>& sentences, std::size_t first, std::size_t end,
                    const Token& separator);

}  // namespace docdec
