#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dysarthria/manifest.hpp"

namespace dysarthria {

enum class Dimension { VoiceQuality, Pronunciation, Prosody };

std::string_view to_string(Dimension d) noexcept;

struct FeatureInfo {
  std::string_view name;   ///< CSV column
  std::string_view label;  ///< human-readable row label in reports
  Dimension dimension;
};

inline constexpr std::size_t kFeatureCount = 39;

/// The measurements in report order: 7 voice quality, 8 pronunciation, 24 prosody.
inline constexpr std::array<FeatureInfo, kFeatureCount> kFeatures{{
    {"jitter", "jitter", Dimension::VoiceQuality},
    {"shimmer", "shimmer", Dimension::VoiceQuality},
    {"ppq", "PPQ", Dimension::VoiceQuality},
    {"apq", "APQ", Dimension::VoiceQuality},
    {"hnr", "HNR", Dimension::VoiceQuality},
    {"num_voice_breaks", "number of VBs", Dimension::VoiceQuality},
    {"degree_voice_breaks", "degree of VBs", Dimension::VoiceQuality},
    {"pcc", "PCC", Dimension::Pronunciation},
    {"pcv", "PCV", Dimension::Pronunciation},
    {"pcp", "PCP", Dimension::Pronunciation},
    {"tvsa", "triangular VSA", Dimension::Pronunciation},
    {"qvsa", "quadrilateral VSA", Dimension::Pronunciation},
    {"fcr", "FCR", Dimension::Pronunciation},
    {"vai", "VAI", Dimension::Pronunciation},
    {"f2_ratio", "F2-Ratio", Dimension::Pronunciation},
    {"speaking_rate", "speaking rate", Dimension::Prosody},
    {"articulation_rate", "articulation rate", Dimension::Prosody},
    {"num_pauses", "number of pauses", Dimension::Prosody},
    {"pause_duration", "pause duration", Dimension::Prosody},
    {"phone_ratio", "phone ratio", Dimension::Prosody},
    {"f0_mean", "F0 mean", Dimension::Prosody},
    {"f0_std", "F0 std", Dimension::Prosody},
    {"f0_min", "F0 min", Dimension::Prosody},
    {"f0_max", "F0 max", Dimension::Prosody},
    {"f0_range", "F0 range", Dimension::Prosody},
    {"energy_mean", "energy mean", Dimension::Prosody},
    {"energy_std", "energy std", Dimension::Prosody},
    {"energy_min", "energy min", Dimension::Prosody},
    {"energy_max", "energy max", Dimension::Prosody},
    {"energy_range", "energy range", Dimension::Prosody},
    {"percent_v", "%V", Dimension::Prosody},
    {"delta_v", "deltaV", Dimension::Prosody},
    {"delta_c", "deltaC", Dimension::Prosody},
    {"varco_v", "VarcoV", Dimension::Prosody},
    {"varco_c", "VarcoC", Dimension::Prosody},
    {"rpvi_v", "rPVIV", Dimension::Prosody},
    {"rpvi_c", "rPVIC", Dimension::Prosody},
    {"npvi_v", "nPVIV", Dimension::Prosody},
    {"npvi_c", "nPVIC", Dimension::Prosody},
}};

/// Column index of a feature name; throws InvalidArgument for unknown names.
std::size_t feature_index(std::string_view name);
std::vector<std::string> all_feature_names();

/// One value per measurement; empty entries are absent, never zero.
using FeatureVector = std::array<std::optional<double>, kFeatureCount>;

struct FeatureRow {
  std::string utterance_id;
  std::string speaker_id;
  Severity severity = Severity::Healthy;
  FeatureVector values{};
};

struct FeatureMatrix {
  std::vector<FeatureRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  std::vector<std::string> speakers() const;  ///< sorted, unique
};

/// Header `utt_id,speaker_id,severity,<39 names>`; absent values are `NA`.
std::string to_csv(const FeatureMatrix& matrix);
/// Throws MissingSeverity when the severity column is missing, MalformedRecord on bad rows.
FeatureMatrix parse_feature_csv(std::string_view text);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

}  // namespace dysarthria
