#include "docdec/world.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace docdec {

using nlohmann::json;

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::kMale: return "M";
    case Gender::kFemale: return "F";
    case Gender::kNeuter: return "N";
  }
  return "?";
}

std::string_view to_string(Formality f) {
  return f == Formality::kFormal ? "formal" : "informal";
}

Gender parse_gender(std::string_view s) {
  if (s == "M") return Gender::kMale;
  if (s == "F") return Gender::kFemale;
  if (s == "N") return Gender::kNeuter;
  throw Error("unknown gender '" + std::string(s) + "'");
}

Formality parse_formality(std::string_view s) {
  if (s == "formal") return Formality::kFormal;
  if (s == "informal") return Formality::kInformal;
  throw Error("unknown formality '" + std::string(s) + "'");
}

void WorldSpec::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) throw Error("epsilon must lie in [0, 0.5)");
  if (lexicon.empty()) throw Error("lexicon is empty");
  for (const auto& [noun, g] : noun_genders) {
    if (!lexicon.contains(noun)) throw Error("noun '" + noun + "' has no lexicon entry");
  }
  if (!lexicon.contains(formality_marker)) {
    throw Error("formality marker '" + formality_marker + "' has no lexicon entry");
  }
  std::set<Token> sources;
  for (const auto& [s, t] : lexicon) sources.insert(s);
  for (const Token& special : {pronoun_src, formality_src, separator}) {
    if (!sources.insert(special).second) {
      throw Error("source token '" + special + "' is both special and a lexicon word");
    }
  }
  std::set<Token> targets;
  for (const Token& t : target_vocab()) {
    if (t.empty()) throw Error("empty target token");
    if (!targets.insert(t).second) throw Error("target token '" + t + "' is not unique");
  }
}

Tokens WorldSpec::target_vocab() const {
  Tokens v;
  v.reserve(lexicon.size() + 7);
  v.insert(v.end(), pronoun_tgt.begin(), pronoun_tgt.end());
  v.insert(v.end(), formality_tgt.begin(), formality_tgt.end());
  for (const auto& [s, t] : lexicon) v.push_back(t);
  v.push_back(separator);
  v.push_back(eos);
  return v;
}

WorldSpec default_world() {
  WorldSpec w;
  const std::pair<const char*, const char*> nouns_m[] = {
      {"moon", "mond"}, {"table", "tisch"}, {"tree", "baum"}, {"dog", "hund"},
      {"car", "wagen"}, {"spoon", "loeffel"}};
  const std::pair<const char*, const char*> nouns_f[] = {
      {"sun", "sonne"}, {"door", "tuer"}, {"lamp", "lampe"}, {"street", "strasse"},
      {"cat", "katze"}, {"city", "stadt"}};
  const std::pair<const char*, const char*> nouns_n[] = {
      {"house", "haus"}, {"book", "buch"}, {"window", "fenster"}, {"child", "kind"},
      {"boat", "boot"}, {"water", "wasser"}};
  const std::pair<const char*, const char*> fillers[] = {
      {"sees", "sieht"},     {"takes", "nimmt"},   {"gives", "gibt"},   {"finds", "findet"},
      {"likes", "mag"},      {"needs", "braucht"}, {"has", "hat"},      {"is", "ist"},
      {"was", "war"},        {"very", "sehr"},     {"old", "alt"},      {"new", "neu"},
      {"big", "gross"},      {"small", "klein"},   {"today", "heute"},  {"there", "dort"},
      {"here", "hier"},      {"again", "wieder"},  {"also", "auch"},    {"not", "nicht"},
      {"and", "und"},        {"but", "aber"},      {"with", "mit"},     {"without", "ohne"},
      {"quickly", "schnell"}, {"slowly", "langsam"}, {"now", "jetzt"},  {"always", "immer"},
      {"never", "nie"},      {"sir", "herr"}};
  for (auto [s, t] : nouns_m) { w.lexicon[s] = t; w.noun_genders[s] = Gender::kMale; }
  for (auto [s, t] : nouns_f) { w.lexicon[s] = t; w.noun_genders[s] = Gender::kFemale; }
  for (auto [s, t] : nouns_n) { w.lexicon[s] = t; w.noun_genders[s] = Gender::kNeuter; }
  for (auto [s, t] : fillers) w.lexicon[s] = t;
  w.validate();
  return w;
}

namespace {

json to_json(const WorldSpec& w) {
  json j;
  j["lexicon"] = w.lexicon;
  json genders = json::object();
  for (const auto& [n, g] : w.noun_genders) genders[n] = to_string(g);
  j["noun_genders"] = genders;
  j["pronoun_src"] = w.pronoun_src;
  j["pronoun_tgt"] = {{"M", w.pronoun_tgt[0]}, {"F", w.pronoun_tgt[1]}, {"N", w.pronoun_tgt[2]}};
  j["formality_src"] = w.formality_src;
  j["formality_tgt"] = {{"informal", w.formality_tgt[0]}, {"formal", w.formality_tgt[1]}};
  j["formality_marker"] = w.formality_marker;
  j["epsilon"] = w.epsilon;
  j["separator"] = w.separator;
  j["eos"] = w.eos;
  return j;
}

}  // namespace

std::string world_to_json(const WorldSpec& world) { return to_json(world).dump(2) + "\n"; }

WorldSpec world_from_json(std::string_view text) {
  WorldSpec w;
  try {
    const json j = json::parse(text);
    w.lexicon = j.at("lexicon").get<std::map<Token, Token>>();
    w.noun_genders.clear();
    for (const auto& [n, g] : j.at("noun_genders").items()) {
      w.noun_genders[n] = parse_gender(g.get<std::string>());
    }
    w.pronoun_src = j.at("pronoun_src").get<Token>();
    const json& pt = j.at("pronoun_tgt");
    w.pronoun_tgt = {pt.at("M").get<Token>(), pt.at("F").get<Token>(), pt.at("N").get<Token>()};
    w.formality_src = j.at("formality_src").get<Token>();
    const json& ft = j.at("formality_tgt");
    w.formality_tgt = {ft.at("informal").get<Token>(), ft.at("formal").get<Token>()};
    w.formality_marker = j.at("formality_marker").get<Token>();
    w.epsilon = j.at("epsilon").get<double>();
    w.separator = j.at("separator").get<Token>();
    w.eos = j.at("eos").get<Token>();
  } catch (const json::exception& e) {
    throw Error(std::string("world spec: ") + e.what());
  }
  w.validate();
  return w;
}

WorldSpec load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open world file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return world_from_json(buf.str());
}

void save_world(const WorldSpec& world, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << world_to_json(world);
}

}  // namespace docdec
