#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dysarthria/features.hpp"
#include "dysarthria/manifest.hpp"
#include "dysarthria/profile.hpp"
#include "dysarthria/pronunciation.hpp"
#include "dysarthria/signal.hpp"

namespace dysarthria {

struct ExtractOptions {
  PitchSettings pitch;
  FormantSettings formants;
  bool keep_alignments = false;
  bool keep_contours = false;
  int jobs = 1;
};

/// Everything measured for one utterance. The vowel-space entries of `row`
/// stay empty until the speaker pass fills them.
struct UtteranceAnalysis {
  FeatureRow row;
  CornerFormants measured_corners;
  std::optional<std::string> alignment;
  std::optional<std::string> pitch_csv;
  std::optional<std::string> intensity_csv;
};

/// Reads the audio and annotation of `record` and computes every
/// per-utterance measurement. Throws on unreadable or inconsistent inputs;
/// measurements whose preconditions fail are left empty.
UtteranceAnalysis analyze_utterance(const UtteranceRecord& record, const LanguageProfile& profile,
                                    const ExtractOptions& options = {});

/// Completes corner vowels from per-speaker means and fills the five
/// vowel-space entries.
void fill_vowel_space(std::vector<UtteranceAnalysis>& analyses, const LanguageProfile& profile);

struct ExtractionFailure {
  std::size_t index = 0;  ///< position in the input list
  std::string utterance_id;
  std::string reason;
};

struct ExtractionResult {
  FeatureMatrix matrix;  ///< successful rows, input order
  std::vector<UtteranceAnalysis> analyses;  ///< parallel to matrix.rows
  std::vector<ExtractionFailure> failures;

  double failure_rate(std::size_t attempted) const {
    return attempted == 0 ? 0.0 : static_cast<double>(failures.size()) / static_cast<double>(attempted);
  }
};

/// Runs analyze_utterance over the records on up to `options.jobs` workers,
/// then the speaker pass. Row order follows the input regardless of timing.
ExtractionResult extract_features(const std::vector<UtteranceRecord>& records, const LanguageProfile& profile,
                                  const ExtractOptions& options = {});

}  // namespace dysarthria
