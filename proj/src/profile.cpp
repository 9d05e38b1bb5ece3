#include "dysarthria/profile.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dysarthria/error.hpp"

namespace dysarthria {

std::string_view to_string(CornerVowel role) noexcept {
  switch (role) {
    case CornerVowel::I: return "i";
    case CornerVowel::A: return "a";
    case CornerVowel::U: return "u";
    case CornerVowel::AE: return "ae";
  }
  return "?";
}

std::optional<CornerVowel> corner_from_string(std::string_view role) noexcept {
  for (auto c : kCornerVowels) {
    if (to_string(c) == role) return c;
  }
  return std::nullopt;
}

LanguageProfile::LanguageProfile(std::string name, std::set<std::string> vowels,
                                 std::set<std::string> consonants, std::set<std::string> silences,
                                 std::map<CornerVowel, std::string> corners, std::set<std::string> nuclei)
    : name_(std::move(name)),
      vowels_(std::move(vowels)),
      consonants_(std::move(consonants)),
      silences_(std::move(silences)),
      corners_(std::move(corners)),
      nuclei_(std::move(nuclei)) {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::InvalidProfile, "profile '" + name_ + "': " + what);
  };
  if (silences_.empty()) fail("at least one silence label is required");
  for (const auto& v : vowels_) {
    if (consonants_.count(v) || silences_.count(v)) fail("symbol '" + v + "' is in more than one class");
  }
  for (const auto& c : consonants_) {
    if (silences_.count(c)) fail("symbol '" + c + "' is both consonant and silence");
  }
  for (auto role : {CornerVowel::I, CornerVowel::A, CornerVowel::U}) {
    if (!corners_.count(role)) fail("corner vowel /" + std::string(to_string(role)) + "/ is required");
  }
  for (const auto& [role, symbol] : corners_) {
    if (!vowels_.count(symbol)) fail("corner vowel '" + symbol + "' is not a vowel");
  }
  for (const auto& n : nuclei_) {
    if (!vowels_.count(n)) fail("nucleus '" + n + "' is not a vowel");
  }
}

std::optional<std::string> LanguageProfile::corner_symbol(CornerVowel role) const {
  auto it = corners_.find(role);
  if (it == corners_.end()) return std::nullopt;
  return it->second;
}

PhoneClass LanguageProfile::classify(std::string_view symbol) const {
  const std::string s(symbol);
  if (vowels_.count(s)) return PhoneClass::Vowel;
  if (consonants_.count(s)) return PhoneClass::Consonant;
  if (silences_.count(s)) return PhoneClass::Silence;
  return PhoneClass::Unknown;
}

std::optional<std::string> LanguageProfile::normalize(std::string_view label) const {
  if (label.empty()) return silence_symbol();
  if (classify(label) != PhoneClass::Unknown) return std::string(label);
  std::string_view stripped = label;
  while (!stripped.empty() && std::isdigit(static_cast<unsigned char>(stripped.back()))) {
    stripped.remove_suffix(1);
  }
  if (!stripped.empty() && stripped.size() != label.size() && classify(stripped) != PhoneClass::Unknown) {
    return std::string(stripped);
  }
  return std::nullopt;
}

LanguageProfile parse_profile(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidProfile, e.what());
  }
  try {
    auto symbols = [&](const char* key) {
      std::set<std::string> out;
      if (doc.contains(key)) {
        for (const auto& s : doc.at(key)) out.insert(s.get<std::string>());
      }
      return out;
    };
    std::map<CornerVowel, std::string> corners;
    for (const auto& [key, value] : doc.at("corner_vowels").items()) {
      auto role = corner_from_string(key);
      if (!role) throw Error(ErrorCode::InvalidProfile, "unknown corner vowel role '" + key + "'");
      corners.emplace(*role, value.get<std::string>());
    }
    return LanguageProfile(doc.value("name", std::string("unnamed")), symbols("vowels"),
                           symbols("consonants"), symbols("silences"), std::move(corners), symbols("nuclei"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidProfile, e.what());
  }
}

LanguageProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open profile " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_profile(text.str());
}

}  // namespace dysarthria
