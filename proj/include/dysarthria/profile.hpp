#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace dysarthria {

enum class PhoneClass { Vowel, Consonant, Silence, Unknown };

/// Corner vowels spanning the F1/F2 vowel space.
enum class CornerVowel { I, A, U, AE };

inline constexpr std::array<CornerVowel, 4> kCornerVowels{CornerVowel::I, CornerVowel::A, CornerVowel::U,
                                                          CornerVowel::AE};

std::string_view to_string(CornerVowel role) noexcept;
std::optional<CornerVowel> corner_from_string(std::string_view role) noexcept;

/// Symbol inventory of one language. Immutable once loaded.
class LanguageProfile {
 public:
  LanguageProfile() = default;
  /// Validates the invariants (disjoint sets, /i/ /a/ /u/ present, nuclei within vowels).
  LanguageProfile(std::string name, std::set<std::string> vowels, std::set<std::string> consonants,
                  std::set<std::string> silences, std::map<CornerVowel, std::string> corners,
                  std::set<std::string> nuclei);

  const std::string& name() const noexcept { return name_; }
  const std::set<std::string>& vowels() const noexcept { return vowels_; }
  const std::set<std::string>& consonants() const noexcept { return consonants_; }
  const std::set<std::string>& silences() const noexcept { return silences_; }
  const std::set<std::string>& nuclei() const noexcept { return nuclei_; }
  const std::map<CornerVowel, std::string>& corners() const noexcept { return corners_; }

  std::optional<std::string> corner_symbol(CornerVowel role) const;
  PhoneClass classify(std::string_view symbol) const;
  bool is_silence(std::string_view symbol) const { return classify(symbol) == PhoneClass::Silence; }
  bool is_nucleus(std::string_view symbol) const { return nuclei_.count(std::string(symbol)) > 0; }
  /// Phoneme symbols (vowels and consonants), silences excluded.
  bool is_phoneme(std::string_view symbol) const {
    const auto c = classify(symbol);
    return c == PhoneClass::Vowel || c == PhoneClass::Consonant;
  }

  /// The label written for silences by serializers; first silence symbol in sort order.
  const std::string& silence_symbol() const { return *silences_.begin(); }

  /// Maps a raw annotation label onto the inventory: exact match first, then the
  /// label with trailing stress digits removed; an empty label is silence.
  std::optional<std::string> normalize(std::string_view label) const;

 private:
  std::string name_;
  std::set<std::string> vowels_;
  std::set<std::string> consonants_;
  std::set<std::string> silences_;
  std::map<CornerVowel, std::string> corners_;
  std::set<std::string> nuclei_;
};

/// JSON document: {"name", "vowels", "consonants", "silences", "corner_vowels": {"i","a","u","ae"}, "nuclei"}.
LanguageProfile load_profile(const std::filesystem::path& path);
LanguageProfile parse_profile(std::string_view json_text);

}  // namespace dysarthria
