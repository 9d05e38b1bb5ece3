#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dysarthria/annotation.hpp"
#include "dysarthria/audio.hpp"
#include "dysarthria/profile.hpp"
#include "dysarthria/signal.hpp"

namespace dysarthria {

inline constexpr std::string_view kGap = "*";

struct AlignedPair {
  std::string canonical;  ///< kGap for an insertion
  std::string decoded;    ///< kGap for a deletion

  bool is_match() const { return canonical != kGap && canonical == decoded; }
  friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

struct AlignmentResult {
  std::vector<AlignedPair> pairs;
  int cost = 0;  ///< substitutions + insertions + deletions
};

/// Minimum edit distance alignment (unit costs). Among equal-cost paths the
/// walk from the left prefers match, then substitution, deletion, insertion.
/// Throws EmptyCanonical.
AlignmentResult align_phoneme_sequences(const std::vector<std::string>& canonical,
                                        const std::vector<std::string>& decoded);

/// Two rows (canonical over decoded) with columns padded to line up.
std::string format_alignment(const AlignmentResult& alignment);

struct PhonemeCorrectness {
  std::optional<double> pcc;  ///< empty when the target has no consonants
  std::optional<double> pcv;  ///< empty when the target has no vowels
  double pcp = 0.0;
  int target_consonants = 0;
  int target_vowels = 0;
  int matched_consonants = 0;
  int matched_vowels = 0;
};

/// Throws UnclassifiedSymbol when a canonical symbol is neither vowel nor consonant.
PhonemeCorrectness phoneme_correctness(const AlignmentResult& alignment, const LanguageProfile& profile);

struct CornerPoint {
  double f1 = 0.0;
  double f2 = 0.0;
  bool interpolated = false;
};

/// Formants per corner role; /ae/ may be missing.
using CornerFormants = std::map<CornerVowel, CornerPoint>;
/// Per-speaker averages of measured corner formants.
using SpeakerCornerMeans = std::map<CornerVowel, CornerPoint>;

/// Formants at the midpoint of the longest instance of each corner vowel in
/// the tier. Roles absent from the tier (or whose estimate failed) are left out.
CornerFormants measure_corner_formants(const AnnotationTier& tier, const AudioClip& clip,
                                       const LanguageProfile& profile, const FormantSettings& settings = {});

/// Fills roles missing from `measured` with the speaker mean (marked
/// interpolated). Throws MissingCornerNoMean for /i/, /a/ or /u/ without a mean.
CornerFormants complete_corner_formants(CornerFormants measured, const SpeakerCornerMeans& means,
                                        const LanguageProfile& profile);

/// measure + complete in one step.
CornerFormants corner_vowel_formants(const AnnotationTier& tier, const AudioClip& clip,
                                     const LanguageProfile& profile, const SpeakerCornerMeans& means);

/// Averages measured (non-interpolated) points per role.
SpeakerCornerMeans speaker_corner_means(const std::vector<CornerFormants>& utterances);

struct VowelSpaceMetrics {
  double tvsa = 0.0;
  std::optional<double> qvsa;  ///< empty without /ae/
  double fcr = 0.0;
  double vai = 0.0;
  double f2_ratio = 0.0;
};

/// Shoelace area of a polygon given as (F1, F2) vertices in order.
double polygon_area(const std::vector<std::pair<double, double>>& vertices);

VowelSpaceMetrics vowel_space_metrics(const CornerFormants& corners);
/// Throws MissingAE when /ae/ is absent.
double quadrilateral_vsa(const CornerFormants& corners);

}  // namespace dysarthria
