#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "docdec/types.hpp"

namespace docdec {

enum class Gender { kMale, kFemale, kNeuter };
enum class Formality { kInformal, kFormal };

std::string_view to_string(Gender g);
std::string_view to_string(Formality f);
Gender parse_gender(std::string_view s);
Formality parse_formality(std::string_view s);

/// The synthetic translation world: which source words translate to which
/// target words, which nouns carry which gender, and the two ambiguity classes
/// (third-person pronoun, second-person register).
struct WorldSpec {
  std::map<Token, Token> lexicon;
  std::map<Token, Gender> noun_genders;
  Token pronoun_src = "it";
  std::array<Token, 3> pronoun_tgt{"er", "sie", "es"};  // indexed by Gender
  Token formality_src = "you";
  std::array<Token, 2> formality_tgt{"du", "Sie"};  // indexed by Formality
  Token formality_marker = "sir";
  double epsilon = 0.05;
  Token separator = "<sep>";
  Token eos = "</s>";

  /// Throws Error if an invariant is violated.
  void validate() const;

  const Token& pronoun_token(Gender g) const { return pronoun_tgt[static_cast<int>(g)]; }
  const Token& formality_token(Formality f) const { return formality_tgt[static_cast<int>(f)]; }

  /// Target vocabulary in tie-break order: pronouns (M, F, N), formality
  /// (informal, formal), lexicon targets by source key, separator, eos.
  Tokens target_vocab() const;
};

/// A small English-to-German flavoured world used by the CLI and the tests.
WorldSpec default_world();

WorldSpec load_world(const std::filesystem::path& path);
void save_world(const WorldSpec& world, const std::filesystem::path& path);
std::string world_to_json(const WorldSpec& world);
WorldSpec world_from_json(std::string_view text);

}  // namespace docdec
