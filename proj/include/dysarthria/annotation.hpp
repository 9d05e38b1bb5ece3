#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dysarthria/profile.hpp"

namespace dysarthria {

struct Interval {
  double start = 0.0;
  double end = 0.0;
  std::string label;

  double duration() const noexcept { return end - start; }
  double midpoint() const noexcept { return 0.5 * (start + end); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Ordered, non-overlapping labeled intervals (phones and silences).
class AnnotationTier {
 public:
  AnnotationTier() = default;
  /// Throws OverlappingIntervals / UnorderedIntervals / InvalidArgument on violations.
  explicit AnnotationTier(std::vector<Interval> intervals);

  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_.size(); }
  bool empty() const noexcept { return intervals_.empty(); }
  double start_time() const noexcept { return intervals_.empty() ? 0.0 : intervals_.front().start; }
  double end_time() const noexcept { return intervals_.empty() ? 0.0 : intervals_.back().end; }

  /// True when every interval lies within [0, duration] (with a half-sample slack).
  bool fits_within(double duration) const noexcept;

  friend bool operator==(const AnnotationTier&, const AnnotationTier&) = default;

 private:
  std::vector<Interval> intervals_;
};

enum class TierFormat { Plain, TextGrid };

/// Detects the format (TextGrid files start with `File type = "ooTextFile"`),
/// parses, validates and normalizes labels against the profile.
AnnotationTier parse_annotation(const std::filesystem::path& path, const LanguageProfile& profile);
AnnotationTier parse_annotation_text(std::string_view text, const LanguageProfile& profile);

/// `<start_s> <end_s> <label>` per line.
std::string to_plain_tier(const AnnotationTier& tier);
/// Long-form single interval tier TextGrid.
std::string to_textgrid(const AnnotationTier& tier, std::string_view tier_name = "phones");

}  // namespace dysarthria
