#include "dysarthria/pronunciation.hpp"

#include <algorithm>
#include <cmath>

#include "dysarthria/error.hpp"

namespace dysarthria {

AlignmentResult align_phoneme_sequences(const std::vector<std::string>& canonical,
                                        const std::vector<std::string>& decoded) {
  if (canonical.empty()) throw Error(ErrorCode::EmptyCanonical, "canonical sequence is empty");
  const std::size_t n = canonical.size();
  const std::size_t m = decoded.size();

  // Suffix costs: cost[i][j] aligns canonical[i:] with decoded[j:], so the
  // tie-break can be resolved walking left to right.
  std::vector<std::vector<int>> cost(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = n + 1; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      if (i == n) {
        cost[i][j] = static_cast<int>(m - j);
      } else if (j == m) {
        cost[i][j] = static_cast<int>(n - i);
      } else {
        const int diag = cost[i + 1][j + 1] + (canonical[i] == decoded[j] ? 0 : 1);
        cost[i][j] = std::min({diag, cost[i + 1][j] + 1, cost[i][j + 1] + 1});
      }
    }
  }

  AlignmentResult result;
  result.cost = cost[0][0];
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m) {
      const bool same = canonical[i] == decoded[j];
      if (cost[i][j] == cost[i + 1][j + 1] + (same ? 0 : 1)) {
        result.pairs.push_back({canonical[i++], decoded[j++]});
        continue;
      }
    }
    if (i < n && cost[i][j] == cost[i + 1][j] + 1) {
      result.pairs.push_back({canonical[i++], std::string(kGap)});
    } else {
      result.pairs.push_back({std::string(kGap), decoded[j++]});
    }
  }
  return result;
}

std::string format_alignment(const AlignmentResult& alignment) {
  std::string top;
  std::string bottom;
  for (const auto& p : alignment.pairs) {
    const std::size_t width = std::max(p.canonical.size(), p.decoded.size());
    if (!top.empty()) {
      top += "  ";
      bottom += "  ";
    }
    top += p.canonical + std::string(width - p.canonical.size(), ' ');
    bottom += p.decoded + std::string(width - p.decoded.size(), ' ');
  }
  auto rstrip = [](std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
  };
  return rstrip(top) + "\n" + rstrip(bottom) + "\n";
}

PhonemeCorrectness phoneme_correctness(const AlignmentResult& alignment, const LanguageProfile& profile) {
  PhonemeCorrectness pc;
  for (const auto& pair : alignment.pairs) {
    if (pair.canonical == kGap) continue;
    const auto cls = profile.classify(pair.canonical);
    if (cls == PhoneClass::Vowel) {
      ++pc.target_vowels;
      if (pair.is_match()) ++pc.matched_vowels;
    } else if (cls == PhoneClass::Consonant) {
      ++pc.target_consonants;
      if (pair.is_match()) ++pc.matched_consonants;
    } else {
      throw Error(ErrorCode::UnclassifiedSymbol, "canonical symbol '" + pair.canonical + "'");
    }
  }
  if (pc.target_consonants > 0) pc.pcc = 100.0 * pc.matched_consonants / pc.target_consonants;
  if (pc.target_vowels > 0) pc.pcv = 100.0 * pc.matched_vowels / pc.target_vowels;
  const int targets = pc.target_consonants + pc.target_vowels;
  pc.pcp = targets > 0 ? 100.0 * (pc.matched_consonants + pc.matched_vowels) / targets : 0.0;
  return pc;
}

CornerFormants measure_corner_formants(const AnnotationTier& tier, const AudioClip& clip,
                                       const LanguageProfile& profile, const FormantSettings& settings) {
  CornerFormants out;
  for (const auto& [role, symbol] : profile.corners()) {
    const Interval* longest = nullptr;
    for (const auto& iv : tier.intervals()) {
      if (iv.label == symbol && (longest == nullptr || iv.duration() > longest->duration())) longest = &iv;
    }
    if (longest == nullptr) continue;
    try {
      const auto slice = estimate_formants(clip, longest->midpoint(), settings);
      out[role] = {slice.f1, slice.f2, false};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoFormantsFound && e.code() != ErrorCode::InvalidArgument) throw;
    }
  }
  return out;
}

CornerFormants complete_corner_formants(CornerFormants measured, const SpeakerCornerMeans& means,
                                        const LanguageProfile& profile) {
  for (const auto& [role, symbol] : profile.corners()) {
    if (measured.count(role)) continue;
    auto mean = means.find(role);
    if (mean != means.end()) {
      measured[role] = {mean->second.f1, mean->second.f2, true};
    } else if (role != CornerVowel::AE) {
      throw Error(ErrorCode::MissingCornerNoMean, "corner vowel /" + std::string(to_string(role)) +
                                                      "/ (" + symbol + ") missing and no speaker mean");
    }
  }
  return measured;
}

CornerFormants corner_vowel_formants(const AnnotationTier& tier, const AudioClip& clip,
                                     const LanguageProfile& profile, const SpeakerCornerMeans& means) {
  return complete_corner_formants(measure_corner_formants(tier, clip, profile), means, profile);
}

SpeakerCornerMeans speaker_corner_means(const std::vector<CornerFormants>& utterances) {
  std::map<CornerVowel, std::pair<CornerPoint, int>> sums;
  for (const auto& utt : utterances) {
    for (const auto& [role, point] : utt) {
      if (point.interpolated) continue;
      auto& [sum, count] = sums[role];
      sum.f1 += point.f1;
      sum.f2 += point.f2;
      ++count;
    }
  }
  SpeakerCornerMeans means;
  for (const auto& [role, acc] : sums) {
    means[role] = {acc.first.f1 / acc.second, acc.first.f2 / acc.second, false};
  }
  return means;
}

double polygon_area(const std::vector<std::pair<double, double>>& vertices) {
  double twice = 0.0;
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    const auto& [x1, y1] = vertices[k];
    const auto& [x2, y2] = vertices[(k + 1) % vertices.size()];
    twice += x1 * y2 - x2 * y1;
  }
  return 0.5 * std::abs(twice);
}

namespace {

const CornerPoint& corner(const CornerFormants& corners, CornerVowel role) {
  auto it = corners.find(role);
  if (it == corners.end()) {
    throw Error(role == CornerVowel::AE ? ErrorCode::MissingAE : ErrorCode::MissingCornerNoMean,
                "corner vowel /" + std::string(to_string(role)) + "/ missing");
  }
  return it->second;
}

}  // namespace

double quadrilateral_vsa(const CornerFormants& corners) {
  const auto& i = corner(corners, CornerVowel::I);
  const auto& ae = corner(corners, CornerVowel::AE);
  const auto& a = corner(corners, CornerVowel::A);
  const auto& u = corner(corners, CornerVowel::U);
  return polygon_area({{i.f1, i.f2}, {ae.f1, ae.f2}, {a.f1, a.f2}, {u.f1, u.f2}});
}

VowelSpaceMetrics vowel_space_metrics(const CornerFormants& corners) {
  const auto& i = corner(corners, CornerVowel::I);
  const auto& a = corner(corners, CornerVowel::A);
  const auto& u = corner(corners, CornerVowel::U);
  VowelSpaceMetrics m;
  m.tvsa = polygon_area({{i.f1, i.f2}, {a.f1, a.f2}, {u.f1, u.f2}});
  if (corners.count(CornerVowel::AE)) m.qvsa = quadrilateral_vsa(corners);
  m.fcr = (u.f2 + a.f2 + i.f1 + u.f1) / (i.f2 + a.f1);
  m.vai = 1.0 / m.fcr;
  m.f2_ratio = i.f2 / u.f2;
  return m;
}

}  // namespace dysarthria
